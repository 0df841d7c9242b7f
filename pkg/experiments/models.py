from django.db import models
from django.utils import timezone


class ExperimentRun(models.Model):
    """Registro de uma invocação dos comandos run/compare"""

    COMMAND_CHOICES = [
        ('run', 'Ensaios individuais'),
        ('compare', 'Comparação Monte Carlo'),
    ]

    STATUS_CHOICES = [
        ('running', 'Em Execução'),
        ('finished', 'Finalizada'),
        ('failed', 'Falhou'),
    ]

    command = models.CharField(
        max_length=20,
        choices=COMMAND_CHOICES,
        verbose_name="Comando"
    )
    preset = models.CharField(
        max_length=60,
        blank=True,
        verbose_name="Preset",
        help_text="Nome do preset usado, vazio para arquivo de configuração"
    )
    config_digest = models.CharField(
        max_length=64,
        db_index=True,
        verbose_name="Digest da Configuração"
    )
    controllers = models.CharField(
        max_length=100,
        verbose_name="Controladores",
        help_text="Nomes separados por vírgula"
    )
    trials = models.PositiveIntegerField(verbose_name="Ensaios")
    horizon = models.PositiveIntegerField(verbose_name="Horizonte")
    seed = models.BigIntegerField(default=0, verbose_name="Semente")
    output_dir = models.CharField(max_length=500, verbose_name="Diretório de Saída")
    status = models.CharField(
        max_length=20,
        choices=STATUS_CHOICES,
        default='running',
        verbose_name="Status"
    )
    created_at = models.DateTimeField(auto_now_add=True, verbose_name="Criado em")
    finished_at = models.DateTimeField(null=True, blank=True, verbose_name="Finalizado em")

    class Meta:
        verbose_name = "Execução de Experimento"
        verbose_name_plural = "Execuções de Experimentos"
        ordering = ['-created_at']

    def __str__(self):
        label = self.preset or self.config_digest[:12]
        return f"{self.get_command_display()} - {label}"

    @property
    def controller_list(self):
        return [name for name in self.controllers.split(',') if name]

    def mark_finished(self):
        self.status = 'finished'
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'finished_at'])

    def mark_failed(self):
        self.status = 'failed'
        self.finished_at = timezone.now()
        self.save(update_fields=['status', 'finished_at'])


class ControllerSummary(models.Model):
    """Estatísticas finais de um controlador dentro de uma execução"""

    run = models.ForeignKey(
        ExperimentRun,
        on_delete=models.CASCADE,
        related_name='summaries',
        verbose_name="Execução"
    )
    controller = models.CharField(max_length=20, verbose_name="Controlador")
    median_final_regret = models.FloatField(null=True, blank=True, verbose_name="Regret Final Mediano")
    aborted_trials = models.PositiveIntegerField(default=0, verbose_name="Ensaios Abortados")
    n_trials = models.PositiveIntegerField(default=0, verbose_name="Ensaios")

    class Meta:
        verbose_name = "Resumo por Controlador"
        verbose_name_plural = "Resumos por Controlador"
        unique_together = ['run', 'controller']
        ordering = ['run', 'controller']

    def __str__(self):
        return f"{self.controller} ({self.run_id})"
