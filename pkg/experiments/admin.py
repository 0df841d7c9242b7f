from django.contrib import admin
from .models import ExperimentRun, ControllerSummary


class ControllerSummaryInline(admin.TabularInline):
    model = ControllerSummary
    extra = 0
    readonly_fields = ['controller', 'median_final_regret', 'aborted_trials', 'n_trials']


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['id', 'command', 'preset', 'status', 'trials', 'horizon', 'created_at']
    list_filter = ['command', 'status', 'preset', 'created_at']
    search_fields = ['preset', 'config_digest', 'output_dir']
    inlines = [ControllerSummaryInline]


@admin.register(ControllerSummary)
class ControllerSummaryAdmin(admin.ModelAdmin):
    list_display = ['run', 'controller', 'median_final_regret', 'aborted_trials']
    list_filter = ['controller']
