"""
Run-configuration schemas.

Configs are JSON objects; unknown keys are rejected and every failure is
reported with its dotted field path.
"""

from marshmallow import RAISE, Schema, ValidationError, fields, validate, validates_schema

from apps.common.exceptions import ConfigurationError
from apps.constellation.shaping import MODES
from constants import PUBLISHED_PROTOGRAPHS

SURROGATES = ('bec', 'biawgn')


class StrictSchema(Schema):
    class Meta:
        unknown = RAISE


class BasematrixSchema(StrictSchema):
    matrix = fields.List(fields.List(fields.Integer(validate=validate.Range(min=0))), required=True)
    d_per_level = fields.Integer(required=True, validate=validate.Range(min=1))
    level_order = fields.List(fields.Integer(validate=validate.Range(min=1)), load_default=None)
    s_max = fields.Integer(load_default=None, validate=validate.Range(min=1))
    min_degree = fields.Integer(load_default=2, validate=validate.Range(min=1))

    @validates_schema
    def check_rectangular(self, data, **kwargs):
        if len({len(row) for row in data['matrix']}) > 1:
            raise ValidationError("rows must have equal length", 'matrix')


class SnrGridSchema(StrictSchema):
    start = fields.Float(required=True)
    stop = fields.Float(required=True)
    step = fields.Float(required=True, validate=validate.Range(min=0, min_inclusive=False))

    @validates_schema
    def check_order(self, data, **kwargs):
        if data['stop'] < data['start']:
            raise ValidationError("stop must not be below start", 'stop')


def _bracket(**options):
    return fields.List(fields.Float(), validate=validate.Length(equal=2), **options)


class DesignSourceMixin:
    """Either a published preset or an inline basematrix."""

    @validates_schema
    def check_source(self, data, **kwargs):
        if (data.get('preset') is None) == (data.get('basematrix') is None):
            raise ValidationError("give exactly one of 'preset' and 'basematrix'", 'preset')


class UncertaintyConfigSchema(StrictSchema):
    m = fields.Integer(required=True, validate=validate.Range(min=1, max=10))
    modes = fields.List(fields.String(validate=validate.OneOf(MODES)), load_default=list(MODES))
    snr_points_db = fields.List(fields.Float(), load_default=None)
    snr_grid = fields.Nested(SnrGridSchema, load_default=None)
    code_rate = fields.Float(load_default=None, validate=validate.Range(min=0, max=1, min_inclusive=False,
                                                                        max_inclusive=False))

    @validates_schema
    def check_grid(self, data, **kwargs):
        if (data.get('snr_points_db') is None) == (data.get('snr_grid') is None):
            raise ValidationError("give exactly one of 'snr_points_db' and 'snr_grid'", 'snr_points_db')
        if 'shaped' in data.get('modes', []) and data['m'] < 2:
            raise ValidationError("shaped mode needs m >= 2", 'modes')


class ThresholdOptionsMixin:
    delta = fields.Float(load_default=None, validate=validate.Range(min=0, max=1, min_inclusive=False,
                                                                    max_inclusive=False))
    max_iterations = fields.Integer(load_default=None, validate=validate.Range(min=1))
    resolution_db = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))
    scan_step_db = fields.Float(load_default=None, validate=validate.Range(min=0, min_inclusive=False))


class ThresholdConfigSchema(DesignSourceMixin, ThresholdOptionsMixin, StrictSchema):
    preset = fields.String(load_default=None, validate=validate.OneOf(sorted(PUBLISHED_PROTOGRAPHS)))
    basematrix = fields.Nested(BasematrixSchema, load_default=None)
    m = fields.Integer(load_default=None, validate=validate.Range(min=1))
    mode = fields.String(load_default=None, validate=validate.OneOf(MODES))
    surrogates = fields.List(fields.String(validate=validate.OneOf(SURROGATES)), load_default=['biawgn'],
                             validate=validate.Length(min=1))
    snr_bracket = _bracket(load_default=None)

    @validates_schema
    def check_inline(self, data, **kwargs):
        if data.get('basematrix') is not None:
            for key in ('m', 'mode', 'snr_bracket'):
                if data.get(key) is None:
                    raise ValidationError(f"'{key}' is required with an inline basematrix", key)


class OptimizeConfigSchema(ThresholdOptionsMixin, StrictSchema):
    m = fields.Integer(required=True, validate=validate.Range(min=1))
    code_rate = fields.Float(required=True)
    d_per_level = fields.Integer(required=True, validate=validate.Range(min=1))
    s_max = fields.Integer(required=True, validate=validate.Range(min=1))
    surrogate = fields.String(load_default='biawgn', validate=validate.OneOf(SURROGATES))
    mode = fields.String(load_default='uniform', validate=validate.OneOf(MODES))
    population_size = fields.Integer(load_default=None, validate=validate.Range(min=4))
    generations = fields.Integer(load_default=200, validate=validate.Range(min=0))
    f_weight = fields.Float(load_default=None)
    crossover_rate = fields.Float(load_default=None)
    level_order = fields.List(fields.Integer(), load_default=None)
    snr_bracket = _bracket(required=True)
    resume = fields.Boolean(load_default=False)
    exhaustive = fields.Boolean(load_default=False)


class LiftConfigSchema(DesignSourceMixin, StrictSchema):
    preset = fields.String(load_default=None, validate=validate.OneOf(sorted(PUBLISHED_PROTOGRAPHS)))
    basematrix = fields.Nested(BasematrixSchema, load_default=None)
    q = fields.Integer(load_default=None, validate=validate.Range(min=1))
    blocklength = fields.Integer(load_default=None, validate=validate.Range(min=1))
    max_moves = fields.Integer(load_default=None, validate=validate.Range(min=0))
    encoder = fields.Boolean(load_default=True)

    @validates_schema
    def check_size(self, data, **kwargs):
        if data.get('q') is not None and data.get('blocklength') is not None:
            raise ValidationError("give at most one of 'q' and 'blocklength'", 'q')
        if data.get('basematrix') is not None and data.get('q') is None and data.get('blocklength') is None:
            raise ValidationError("an inline basematrix needs 'q' or 'blocklength'", 'q')


class CodeFilesSchema(StrictSchema):
    alist = fields.String(required=True)
    sidecar = fields.String(required=True)


class SimulateConfigSchema(StrictSchema):
    code = fields.Nested(CodeFilesSchema, required=True)
    mode = fields.String(required=True, validate=validate.OneOf(MODES))
    snr_points_db = fields.List(fields.Float(), required=True)
    max_frames = fields.Integer(load_default=None, validate=validate.Range(min=1))
    min_frame_errors = fields.Integer(load_default=None, validate=validate.Range(min=1))
    max_iterations = fields.Integer(load_default=None, validate=validate.Range(min=1))
    bitmapper_permutation = fields.List(fields.Integer(), load_default=None)
    permutation_sweep = fields.Boolean(load_default=False)
    include_priors = fields.Boolean(load_default=True)
    nu = fields.Float(load_default=None, validate=validate.Range(min=0))
    surrogate = fields.String(load_default=None, validate=validate.OneOf(('matched',)))
    surrogate_sigma = fields.List(fields.Float(validate=validate.Range(min=0)), load_default=None)
    histograms = fields.Boolean(load_default=False)
    resume = fields.Boolean(load_default=False)

    @validates_schema
    def check_variant(self, data, **kwargs):
        if data.get('permutation_sweep'):
            if data.get('bitmapper_permutation') is not None:
                raise ValidationError("a permutation sweep covers every permutation", 'bitmapper_permutation')
            if data.get('surrogate') is not None:
                raise ValidationError("a permutation sweep runs on the physical channel", 'surrogate')
        if data.get('surrogate_sigma') is not None and data.get('surrogate') is None:
            raise ValidationError("'surrogate_sigma' needs 'surrogate'", 'surrogate_sigma')


def _dotted(messages, prefix=''):
    if isinstance(messages, dict):
        for key, value in messages.items():
            path = f'{prefix}.{key}' if prefix else str(key)
            yield from _dotted(value, path)
    else:
        text = '; '.join(str(m) for m in messages) if isinstance(messages, list) else str(messages)
        yield prefix, text


def load_config(schema: Schema, data) -> dict:
    """
    Validate ``data`` against ``schema``.

    Raises:
        ConfigurationError: carrying the dotted path of the first failing field.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("configuration must be a JSON object")
    try:
        return schema.load(data)
    except ValidationError as exc:
        path, message = next(_dotted(exc.messages), ('', str(exc)))
        raise ConfigurationError(message, path or None) from exc
