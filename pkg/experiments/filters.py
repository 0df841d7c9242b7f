import django_filters
from .models import ExperimentRun


class ExperimentRunFilter(django_filters.FilterSet):
    """Filtros para execuções registradas"""

    command = django_filters.ChoiceFilter(choices=ExperimentRun.COMMAND_CHOICES)
    status = django_filters.ChoiceFilter(choices=ExperimentRun.STATUS_CHOICES)
    preset = django_filters.CharFilter(lookup_expr='iexact')
    digest = django_filters.CharFilter(field_name='config_digest', lookup_expr='startswith')
    controller = django_filters.CharFilter(method='filter_controller')

    # Filtros por data
    date_from = django_filters.DateFilter(field_name='created_at', lookup_expr='date__gte')
    date_to = django_filters.DateFilter(field_name='created_at', lookup_expr='date__lte')

    class Meta:
        model = ExperimentRun
        fields = {
            'trials': ['exact', 'gte', 'lte'],
            'horizon': ['exact', 'gte', 'lte'],
        }

    def filter_controller(self, queryset, name, value):
        """Execuções que incluem o controlador"""
        if value:
            return queryset.filter(controllers__contains=value)
        return queryset
