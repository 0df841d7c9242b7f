# experiments/exceptions.py - ERROS DE CONFIGURAÇÃO E PERSISTÊNCIA


class ConfigError(Exception):
    """
    Configuração de experimento inválida

    errors: {'secao.campo': ['mensagem', ...]}
    """

    def __init__(self, errors, message=None):
        self.errors = {str(key): [str(msg) for msg in msgs] for key, msgs in errors.items()}
        super().__init__(message or self.format())

    @property
    def fields(self):
        return sorted(self.errors)

    def format(self) -> str:
        lines = [f"{field}: {'; '.join(msgs)}" for field, msgs in sorted(self.errors.items())]
        return 'Configuração inválida - ' + ' | '.join(lines)


class ExportError(OSError):
    """Falha ao gravar ou ler artefatos de resultado"""
