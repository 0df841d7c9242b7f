# experiments/views.py - API SOMENTE LEITURA DO REGISTRO DE EXECUÇÕES

from rest_framework import viewsets
from rest_framework.permissions import AllowAny

from .filters import ExperimentRunFilter
from .models import ExperimentRun
from .serializers import ExperimentRunSerializer


class ExperimentRunViewSet(viewsets.ReadOnlyModelViewSet):
    """Lista e detalhe das execuções de run/compare"""
    queryset = ExperimentRun.objects.prefetch_related('summaries')
    serializer_class = ExperimentRunSerializer
    permission_classes = [AllowAny]
    filterset_class = ExperimentRunFilter
    search_fields = ['preset', 'config_digest']
    ordering_fields = ['created_at', 'trials', 'horizon']
    ordering = ['-created_at']
