# experiments/serializers.py - VALIDAÇÃO DA CONFIGURAÇÃO DE EXPERIMENTOS

import math

from django.conf import settings
from rest_framework import serializers

from control.control_math import DARE_METHODS
from control.estimator import B_SET_KINDS
from control.mrac import EXPLORATION_MODES, SCHEDULE_MODES
from control.systems import SYSTEM_NAMES

from .config import CONTROLLER_NAMES, SECTION_NAMES, SYSTEM_DIMENSIONS
from .models import ExperimentRun, ControllerSummary

PLOT_SCALES = ('log', 'linear')
INITIAL_ESTIMATES = ('nominal', 'truth')


def flatten_errors(detail, prefix=''):
    """Achata erros aninhados do DRF em {'secao.campo': [mensagens]}"""
    flat = {}
    if isinstance(detail, dict):
        for key, value in detail.items():
            if key == 'non_field_errors':
                path = prefix or '(raiz)'
            else:
                path = f"{prefix}.{key}" if prefix else str(key)
            for sub_path, msgs in flatten_errors(value, path).items():
                flat.setdefault(sub_path, []).extend(msgs)
    elif isinstance(detail, (list, tuple)):
        if all(isinstance(item, (dict, list)) for item in detail) and detail:
            for index, item in enumerate(detail):
                if item:
                    flat.update(flatten_errors(item, f"{prefix}.{index}"))
        else:
            flat[prefix or '(raiz)'] = [str(item) for item in detail]
    else:
        flat[prefix or '(raiz)'] = [str(detail)]
    return flat


class StrictSerializerMixin:
    """Rejeita chaves desconhecidas em vez de ignorá-las"""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Campo desconhecido.'] for key in unknown})
        return super().to_internal_value(data)


class PositiveFloatField(serializers.FloatField):
    default_error_messages = {'not_positive': 'Deve ser maior que zero.'}

    def to_internal_value(self, data):
        value = super().to_internal_value(data)
        if not value > 0:
            self.fail('not_positive')
        return value


# ===== SEÇÕES =====

class SystemSerializer(StrictSerializerMixin, serializers.Serializer):
    name = serializers.ChoiceField(choices=SYSTEM_NAMES)
    perturbation_scale = serializers.FloatField(min_value=0.0, max_value=1.0, default=0.5)
    stabilizing = serializers.BooleanField(default=True)
    perturbation_seed = serializers.IntegerField(min_value=0, default=0)
    dt = PositiveFloatField(default=0.01)
    epsilon = serializers.ListField(
        child=serializers.FloatField(), min_length=4, max_length=4, default=[0.5, 1.0, 1.0, 1.0]
    )
    x0 = serializers.ListField(child=serializers.FloatField(), allow_null=True, default=None)

    def validate_epsilon(self, value):
        if any(eps <= 0 for eps in value):
            raise serializers.ValidationError('Entradas de LOE devem ser > 0.')
        return value

    def validate(self, attrs):
        x0 = attrs.get('x0')
        if x0 is not None:
            n = SYSTEM_DIMENSIONS[attrs['name']][0]
            if len(x0) != n:
                raise serializers.ValidationError({'x0': [f'Esperado {n} entradas para {attrs["name"]}.']})
        return attrs


class CostSerializer(StrictSerializerMixin, serializers.Serializer):
    q_scale = PositiveFloatField(default=10.0)
    r_scale = PositiveFloatField(default=1.0)


class NoiseSerializer(StrictSerializerMixin, serializers.Serializer):
    sigma_w = serializers.FloatField(min_value=0.0, allow_null=True, default=None)


class ExplorationSerializer(StrictSerializerMixin, serializers.Serializer):
    mode = serializers.ChoiceField(choices=EXPLORATION_MODES, default='sinusoidal')
    sigma_explore = serializers.FloatField(min_value=0.0, default=0.1)
    C_r = serializers.FloatField(min_value=0.0, allow_null=True, default=None)
    decay_exponent = serializers.FloatField(min_value=0.0, default=1.0 / 6.0)
    frequencies = serializers.ListField(child=serializers.FloatField(), default=list)

    def validate_frequencies(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError('Frequências devem ser distintas.')
        if any(not 0 < w < math.pi for w in value):
            raise serializers.ValidationError('Frequências devem estar em (0, π).')
        return value


class ScheduleSerializer(StrictSerializerMixin, serializers.Serializer):
    mode = serializers.ChoiceField(choices=SCHEDULE_MODES, default='linear')
    C_T = serializers.IntegerField(min_value=1, default=lambda: settings.ALQR_SETTINGS['DEFAULT_C_T'])


class EstimatorSerializer(StrictSerializerMixin, serializers.Serializer):
    sigma0 = PositiveFloatField(default=10.0)
    gamma = PositiveFloatField(default=0.5)
    a_max = PositiveFloatField(default=1.0)
    b_kind = serializers.ChoiceField(choices=B_SET_KINDS, default='diagonal_box')
    b_min = PositiveFloatField(default=0.25)
    b_max = PositiveFloatField(default=1.75)
    b_radius = PositiveFloatField(allow_null=True, default=None)
    initial_estimate = serializers.ChoiceField(choices=INITIAL_ESTIMATES, default='nominal')
    resync_every = serializers.IntegerField(min_value=0, default=1000)
    projection_tol = PositiveFloatField(default=1e-10)
    projection_max_iter = serializers.IntegerField(min_value=1, default=10_000)

    def validate(self, attrs):
        if attrs['b_min'] > attrs['b_max']:
            raise serializers.ValidationError({'b_min': ['Deve ser <= b_max.']})
        if attrs['b_kind'] == 'frobenius_ball' and attrs.get('b_radius') is None:
            raise serializers.ValidationError({'b_radius': ['Obrigatório com b_kind=frobenius_ball.']})
        return attrs


class HarnessSerializer(StrictSerializerMixin, serializers.Serializer):
    blowup_threshold = PositiveFloatField(default=lambda: settings.ALQR_SETTINGS['BLOWUP_THRESHOLD'])
    identity_tol = PositiveFloatField(default=lambda: settings.ALQR_SETTINGS['IDENTITY_TOLERANCE'])
    check_error_model = serializers.BooleanField(default=True)
    record_diagnostics = serializers.BooleanField(default=False)
    dare_method = serializers.ChoiceField(choices=DARE_METHODS, allow_null=True, default=None)
    dare_tol = PositiveFloatField(allow_null=True, default=None)
    plot_scale = serializers.ChoiceField(choices=PLOT_SCALES, default='log')


class ExperimentConfigSerializer(StrictSerializerMixin, serializers.Serializer):
    """Configuração completa; seções ausentes recebem os padrões"""
    system = SystemSerializer()
    controllers = serializers.ListField(
        child=serializers.ChoiceField(choices=CONTROLLER_NAMES),
        min_length=1,
        default=lambda: list(CONTROLLER_NAMES),
    )
    cost = CostSerializer()
    noise = NoiseSerializer()
    exploration = ExplorationSerializer()
    schedule = ScheduleSerializer()
    estimator = EstimatorSerializer()
    harness = HarnessSerializer()
    horizon = serializers.IntegerField(min_value=1, default=lambda: settings.ALQR_SETTINGS['DEFAULT_HORIZON'])
    trials = serializers.IntegerField(min_value=1, default=lambda: settings.ALQR_SETTINGS['DEFAULT_TRIALS'])
    seed = serializers.IntegerField(min_value=0, default=0)
    output_dir = serializers.CharField(allow_null=True, required=False, default=None)

    def to_internal_value(self, data):
        if isinstance(data, dict):
            data = dict(data)
            for name in SECTION_NAMES:
                if name != 'system':
                    data.setdefault(name, {})
        return super().to_internal_value(data)

    def validate_controllers(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError('Controladores repetidos.')
        return value

    def validate(self, attrs):
        exploration = attrs['exploration']
        frequencies = exploration.get('frequencies') or []
        if exploration['mode'] == 'sinusoidal' and frequencies:
            n, m = SYSTEM_DIMENSIONS[attrs['system']['name']]
            needed = math.ceil((n + m) / 2)
            if len(frequencies) < needed:
                raise serializers.ValidationError(
                    {'exploration': {'frequencies': [f'São necessárias ao menos {needed} frequências.']}}
                )
        return attrs


# ===== REGISTRO DE EXECUÇÕES =====

class ControllerSummarySerializer(serializers.ModelSerializer):
    class Meta:
        model = ControllerSummary
        fields = ['controller', 'median_final_regret', 'aborted_trials', 'n_trials']


class ExperimentRunSerializer(serializers.ModelSerializer):
    """Serializer de leitura para execuções registradas"""
    summaries = ControllerSummarySerializer(many=True, read_only=True)
    status_display = serializers.CharField(source='get_status_display', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'command', 'preset', 'config_digest', 'controllers', 'trials',
            'horizon', 'seed', 'output_dir', 'status', 'status_display',
            'created_at', 'finished_at', 'summaries',
        ]
        read_only_fields = fields
