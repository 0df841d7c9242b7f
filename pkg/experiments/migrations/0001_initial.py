from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('run', 'Ensaios individuais'), ('compare', 'Comparação Monte Carlo')], max_length=20, verbose_name='Comando')),
                ('preset', models.CharField(blank=True, help_text='Nome do preset usado, vazio para arquivo de configuração', max_length=60, verbose_name='Preset')),
                ('config_digest', models.CharField(db_index=True, max_length=64, verbose_name='Digest da Configuração')),
                ('controllers', models.CharField(help_text='Nomes separados por vírgula', max_length=100, verbose_name='Controladores')),
                ('trials', models.PositiveIntegerField(verbose_name='Ensaios')),
                ('horizon', models.PositiveIntegerField(verbose_name='Horizonte')),
                ('seed', models.BigIntegerField(default=0, verbose_name='Semente')),
                ('output_dir', models.CharField(max_length=500, verbose_name='Diretório de Saída')),
                ('status', models.CharField(choices=[('running', 'Em Execução'), ('finished', 'Finalizada'), ('failed', 'Falhou')], default='running', max_length=20, verbose_name='Status')),
                ('created_at', models.DateTimeField(auto_now_add=True, verbose_name='Criado em')),
                ('finished_at', models.DateTimeField(blank=True, null=True, verbose_name='Finalizado em')),
            ],
            options={
                'verbose_name': 'Execução de Experimento',
                'verbose_name_plural': 'Execuções de Experimentos',
                'ordering': ['-created_at'],
            },
        ),
        migrations.CreateModel(
            name='ControllerSummary',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('controller', models.CharField(max_length=20, verbose_name='Controlador')),
                ('median_final_regret', models.FloatField(blank=True, null=True, verbose_name='Regret Final Mediano')),
                ('aborted_trials', models.PositiveIntegerField(default=0, verbose_name='Ensaios Abortados')),
                ('n_trials', models.PositiveIntegerField(default=0, verbose_name='Ensaios')),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='summaries', to='experiments.experimentrun', verbose_name='Execução')),
            ],
            options={
                'verbose_name': 'Resumo por Controlador',
                'verbose_name_plural': 'Resumos por Controlador',
                'ordering': ['run', 'controller'],
                'unique_together': {('run', 'controller')},
            },
        ),
    ]
