# control/exceptions.py - ERROS DO NÚCLEO NUMÉRICO


class ControlError(Exception):
    """Erro base do núcleo de controle"""


class NonConvergence(ControlError):
    """Iteração não atingiu a tolerância dentro do limite de iterações"""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class IllConditioned(ControlError):
    """Matriz numericamente singular onde se exige inversão"""


class UnstableMatrix(ControlError):
    """Matriz com raio espectral >= 1 onde se exige Schur-estabilidade"""


class DimensionMismatch(ControlError):
    """Dimensões incompatíveis entre estado, entrada e matrizes"""


class InvalidLOE(ControlError):
    """Vetor de perda de efetividade (LOE) com entradas não positivas"""


class RankDeficient(ControlError):
    """B_m sem posto coluna completo"""


class NumericalBreakdown(ControlError):
    """Estado do estimador corrompido (denominador não positivo)"""


class SingularThetaB(ControlError):
    """Estimativa de Θ_B não inversível (conjunto de projeção mal configurado)"""


class IdentityViolation(ControlError):
    """Identidade algébrica violada: erro de ligação entre planta e comparador"""

    def __init__(self, message, residual=None, step=None):
        super().__init__(message)
        self.residual = residual
        self.step = step


class WindowTooShort(ControlError):
    """Janela de análise de excitação curta demais para as frequências pedidas"""
