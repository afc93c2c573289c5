"""
Strict validation of JSON scenario configurations. Every scenario has a form; the group, norm and lattice are
nested objects validated by their own forms and turned into spec objects before the parent form builds the
ScenarioConfig.
"""
import hashlib
import json
from copy import copy, deepcopy

import numpy as np
import wrapt
from django import forms
from django.core.exceptions import ValidationError

from orbitlab.conf import get_setting
from orbitlab.lattice.frames import GramBox
from orbitlab.lattice.observables import observable_from_dict
from orbitlab.lattice.spec import DET_PM1, SL, LatticeSpec, UnsupportedLattice
from orbitlab.matgroup.norms import NORM_KINDS, InvalidNorm, norm_from_dict
from orbitlab.rootsys.data import InvalidGroupSpec
from orbitlab.rootsys.groups import GROUP_FAMILIES, group_from_dict
from orbitlab.volume.cartan import MonteCarlo, Quadrature


SCHEMA_VERSION = 1

LEDRAPPIER = 'ledrappier'
TORUS = 'torus'
TRANSLATE_MODULAR = 'translate-modular'
COUNTEREXAMPLE_D2 = 'counterexample-d2'
NONBALANCED = 'nonbalanced'
OPPENHEIM = 'oppenheim-frames'
VOLUME_SWEEP = 'volume-sweep'
AUDIT = 'audit'


class ConfigError(Exception):
    """
    An invalid scenario configuration. ``errors`` maps field names to lists of messages.
    """

    def __init__(self, errors):
        self.errors = errors
        super(ConfigError, self).__init__(json.dumps(errors, sort_keys=True))


class NestedFormConfig(object):
    """
    Defines how a nested form is handled in the context of another form. A form class using
    NestedConfigFormMixin lists these in ``nested_form_configs``; the nested object is read from the parent
    data under ``key``.
    """

    def __init__(self, cls, key, required=False, error_messages=None):
        """
        :param cls: Any form class reference

        :param key: The key of the nested object in the parent data. The save value of the nested form is
                    passed to the parent save method under the same name.
        :type key: str

        :param required: Determines if the nested object must be present
        :type required: bool

        :param error_messages: Any error messages to override, keyed by field name and then by error type
        :type error_messages: dict
        """
        self.cls = cls
        self.key = key
        self.required = required
        self.error_messages = error_messages or {}
        self.instance = None

        assert self.cls
        assert self.key

    def set_instance(self, *args, **kwargs):
        self.instance = self.cls(*args, **kwargs)

        # Copy the messages so overrides do not leak into the form class
        for field_name, messages in self.error_messages.items():
            if field_name in self.instance.fields:
                field = self.instance.fields[field_name]
                field.error_messages = deepcopy(field.error_messages)
                field.error_messages.update(messages)


class StrictFormMixin(object):
    """
    Rejects keys that no field (or nested form) claims.
    """

    def clean(self):
        cleaned_data = super(StrictFormMixin, self).clean()
        unknown = sorted(set(self.data) - set(self.fields))
        if unknown:
            raise ValidationError('Unknown keys: {0}'.format(', '.join(unknown)))
        return cleaned_data


class NestedConfigFormMixin(StrictFormMixin):
    """
    Allows a form to contain optional nested objects, each validated by its own form. Nested forms are
    cleaned before the parent fields, and their save values are handed to the parent save method as keyword
    arguments.
    """

    nested_form_configs = []

    def __init__(self, *args, **kwargs):
        super(NestedConfigFormMixin, self).__init__(*args, **kwargs)

        # The cleaned nested values replace the raw objects
        self.data = copy(self.data)

        if not hasattr(self, 'save'):
            raise Exception('Base form must have a save method - {0}'.format(self.__class__))
        self._save = self.save
        self.save = self._nested_save(self._save)

        self.nested_forms = []
        for nested_form_config in self.nested_form_configs:
            if nested_form_config.key in self.fields:
                raise Exception('A nested field with key {0} already exists on the base form'.format(
                    nested_form_config.key
                ))
            self.fields[nested_form_config.key] = forms.Field(required=False)

            nested_data = self.data.get(nested_form_config.key)
            nested_form_config.set_instance(data=nested_data if isinstance(nested_data, dict) else {})
            self.nested_forms.append(nested_form_config)

    @wrapt.decorator
    def _nested_save(self, wrapped, instance, args, kwargs):
        """
        Saves every present nested form first and passes the results to the parent save method under their
        keys. Absent optional objects are passed as None.
        """
        responses = {config.key: None for config in self.nested_forms}
        for nested_form_config in self.get_required_forms():
            responses[nested_form_config.key] = nested_form_config.instance.save()
        return wrapped(*args, **dict(kwargs, **responses))

    def get_required_forms(self):
        """
        :rtype: list of NestedFormConfig
        """
        return [nested_form for nested_form in self.nested_forms if self.form_is_required(nested_form)]

    def form_is_required(self, nested_form):
        return nested_form.required or self.data.get(nested_form.key) is not None

    def _clean_fields(self):
        for form in self.get_required_forms():
            if not isinstance(self.data.get(form.key), dict):
                self.add_error(form.key, 'Expected an object')
                continue

            errors = form.instance.errors
            if errors:
                self.add_error(form.key, ['{0}: {1}'.format(name, ' '.join(messages))
                                          for name, messages in errors.items()])
            else:
                self.data[form.key] = form.instance.cleaned_data

        return super(NestedConfigFormMixin, self)._clean_fields()


class ListField(forms.Field):
    """
    A JSON array of numbers, optionally of fixed length.
    """
    default_error_messages = {
        'invalid': 'Expected a list of numbers',
        'length': 'Expected {length} entries',
    }

    def __init__(self, *args, length=None, cast=float, **kwargs):
        self.length = length
        self.cast = cast
        super(ListField, self).__init__(*args, **kwargs)

    def to_python(self, value):
        if value in self.empty_values:
            return None
        if not isinstance(value, (list, tuple)):
            raise ValidationError(self.error_messages['invalid'], code='invalid')
        try:
            values = [self.cast(item) for item in value]
        except (TypeError, ValueError):
            raise ValidationError(self.error_messages['invalid'], code='invalid')
        if not all(np.isfinite(values)):
            raise ValidationError(self.error_messages['invalid'], code='invalid')
        if self.length is not None and len(values) != self.length:
            raise ValidationError(self.error_messages['length'].format(length=self.length), code='length')
        return values


class MatrixField(forms.Field):
    """
    A square JSON matrix of finite numbers.
    """

    def to_python(self, value):
        if value in self.empty_values:
            return None
        try:
            matrix = np.array(value, dtype=np.float64)
        except (TypeError, ValueError):
            raise ValidationError('Expected a matrix of numbers', code='invalid')
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or not np.all(np.isfinite(matrix)):
            raise ValidationError('Expected a square matrix of finite numbers', code='invalid')
        return matrix

    # Field.validate and Field.run_validators test ``value in self.empty_values``, which arrays cannot answer
    def validate(self, value):
        if value is None and self.required:
            raise ValidationError(self.error_messages['required'], code='required')

    def run_validators(self, value):
        if value is None:
            return
        for validator in self.validators:
            validator(value)


class ObjectField(forms.Field):
    def to_python(self, value):
        if value in self.empty_values:
            return None
        if not isinstance(value, dict):
            raise ValidationError('Expected an object', code='invalid')
        return value


class GroupSpecForm(StrictFormMixin, forms.Form):
    family = forms.ChoiceField(choices=[(family, family) for family in sorted(GROUP_FAMILIES)])
    n = forms.IntegerField(required=False, min_value=2)
    p = forms.IntegerField(required=False, min_value=1)
    q = forms.IntegerField(required=False, min_value=1)
    l = forms.IntegerField(required=False, min_value=2)  # noqa: E741

    def clean(self):
        cleaned_data = super(GroupSpecForm, self).clean()
        try:
            self.group = group_from_dict(self.spec_dict(cleaned_data))
        except InvalidGroupSpec as e:
            raise ValidationError(str(e))
        return cleaned_data

    @staticmethod
    def spec_dict(cleaned_data):
        return {key: value for key, value in cleaned_data.items() if value is not None}

    def save(self):
        return self.group


class NormSpecForm(StrictFormMixin, forms.Form):
    kind = forms.ChoiceField(choices=[(kind, kind) for kind in sorted(NORM_KINDS)])
    # A string so that 'inf' is accepted
    p = forms.CharField(required=False)
    dim = forms.IntegerField(required=False, min_value=1)
    c = forms.FloatField(required=False)
    weights = MatrixField(required=False)

    def clean_p(self):
        p = self.cleaned_data['p']
        if not p:
            return None
        try:
            return float(p)
        except ValueError:
            raise ValidationError('p must be a number or inf')

    def clean(self):
        cleaned_data = super(NormSpecForm, self).clean()
        data = {key: value for key, value in cleaned_data.items() if value is not None}
        try:
            self.norm = norm_from_dict(data)
        except (InvalidNorm, ValueError) as e:
            raise ValidationError(str(e))
        return cleaned_data

    def save(self):
        return self.norm


class LatticeSpecForm(StrictFormMixin, forms.Form):
    family = forms.ChoiceField(choices=[(SL, SL), (DET_PM1, DET_PM1)], required=False)
    dim = forms.IntegerField(required=False)

    def clean(self):
        cleaned_data = super(LatticeSpecForm, self).clean()
        try:
            self.lattice = LatticeSpec(cleaned_data.get('family') or SL, cleaned_data.get('dim') or 2)
        except UnsupportedLattice as e:
            raise ValidationError(str(e))
        return cleaned_data

    def save(self):
        return self.lattice


class MethodForm(StrictFormMixin, forms.Form):
    """
    The integration method of the volume engine: quadrature with a node count, or Monte Carlo.
    """
    kind = forms.ChoiceField(choices=[('quadrature', 'quadrature'), ('monte_carlo', 'monte_carlo')])
    nodes = forms.IntegerField(required=False, min_value=1)
    samples = forms.IntegerField(required=False, min_value=1)
    strata = forms.IntegerField(required=False, min_value=1)
    seed = forms.IntegerField(required=False, min_value=0)

    def save(self):
        data = self.cleaned_data
        if data['kind'] == 'quadrature':
            return Quadrature(nodes=data['nodes'] or get_setting('K_NODES'))
        return MonteCarlo(samples=data['samples'] or 256, seed=data['seed'] or 0, strata=data['strata'] or 16)


class ScenarioConfig(object):
    """
    A validated scenario configuration. ``params`` holds the scenario specific fields; ``raw`` is the input
    that was validated, whose canonical JSON is hashed into ``config_hash``.
    """

    def __init__(self, scenario, raw, group=None, norm=None, lattice=None, method=None, thresholds=None,
                 seed=None, output_dir=None, threads=None, mc_samples=None, mc_strata=None, params=None):
        self.scenario = scenario
        self.raw = raw
        self.group = group
        self.norm = norm
        self.lattice = lattice or LatticeSpec(SL, 2)
        self.method = method
        self.thresholds = tuple(thresholds) if thresholds else ()
        self.seed = get_setting('DEFAULT_SEED') if seed is None else seed
        self.output_dir = output_dir or get_setting('OUTPUT_DIR')
        self.threads = threads or get_setting('THREADS')
        self.mc_samples = mc_samples
        self.mc_strata = mc_strata
        self.params = params or {}

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.raw, sort_keys=True, separators=(',', ':'), default=str)
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()

    def monte_carlo(self, samples: int = 256, strata: int = 16) -> MonteCarlo:
        """
        The configured Monte Carlo budget, or the scenario default when the config does not set one.
        """
        return MonteCarlo(samples=self.mc_samples or samples, seed=self.seed, strata=self.mc_strata or strata)

    def __repr__(self):
        return 'ScenarioConfig({0}, {1})'.format(self.scenario, self.config_hash[:12])


class ScenarioForm(NestedConfigFormMixin, forms.Form):
    """
    Fields shared by every scenario. Subclasses add their own fields, which end up in ScenarioConfig.params.
    """
    scenario_name = None

    schema_version = forms.IntegerField()
    scenario = forms.CharField()
    thresholds = ListField(required=False)
    seed = forms.IntegerField(required=False, min_value=0)
    output_dir = forms.CharField(required=False)
    threads = forms.IntegerField(required=False, min_value=1)
    mc_samples = forms.IntegerField(required=False, min_value=1)
    mc_strata = forms.IntegerField(required=False, min_value=1)

    nested_form_configs = []
    common_fields = ('schema_version', 'scenario', 'thresholds', 'seed', 'output_dir', 'threads', 'mc_samples',
                     'mc_strata')

    def __init__(self, *args, **kwargs):
        # Nested configs hold form instances, so each form gets its own copies
        self.nested_form_configs = [copy(config) for config in self.nested_form_configs]
        self.raw_data = deepcopy(kwargs.get('data') or (args[0] if args else {}))
        super(ScenarioForm, self).__init__(*args, **kwargs)

    def clean_schema_version(self):
        version = self.cleaned_data['schema_version']
        if version != SCHEMA_VERSION:
            raise ValidationError('Unsupported schema version {0}, expected {1}'.format(version, SCHEMA_VERSION))
        return version

    def clean_scenario(self):
        scenario = self.cleaned_data['scenario']
        if scenario != self.scenario_name:
            raise ValidationError('Expected scenario {0}'.format(self.scenario_name))
        return scenario

    def clean_thresholds(self):
        thresholds = self.cleaned_data['thresholds']
        if thresholds and min(thresholds) <= 0:
            raise ValidationError('Thresholds must be positive')
        return sorted(thresholds) if thresholds else thresholds

    def save(self, group=None, norm=None, lattice=None, method=None):
        nested = {config.key for config in self.nested_forms}
        params = {
            key: value for key, value in self.cleaned_data.items()
            if key not in self.common_fields and key not in nested
        }
        data = self.cleaned_data
        return ScenarioConfig(
            data['scenario'], self.raw_data, group=group, norm=norm, lattice=lattice, method=method,
            thresholds=data['thresholds'], seed=data['seed'], output_dir=data['output_dir'],
            threads=data['threads'], mc_samples=data['mc_samples'], mc_strata=data['mc_strata'], params=params,
        )


def nested(**keys):
    return [NestedFormConfig(cls=cls, key=key) for key, cls in keys.items()]


class LedrappierForm(ScenarioForm):
    scenario_name = LEDRAPPIER
    v = ListField(required=False, length=2)
    observable = ObjectField(required=False)
    monte_carlo = forms.BooleanField(required=False)

    nested_form_configs = nested(norm=NormSpecForm)

    def clean_observable(self):
        data = self.cleaned_data['observable']
        if data is None:
            return None
        try:
            observable_from_dict(data)
        except (TypeError, ValueError) as e:
            raise ValidationError(str(e))
        return data


class TorusForm(ScenarioForm):
    scenario_name = TORUS
    dim = forms.IntegerField(required=False, min_value=2, max_value=3)
    x0 = ListField(required=False)
    frequencies = forms.Field(required=False)
    control = forms.BooleanField(required=False)

    nested_form_configs = nested(norm=NormSpecForm)

    def clean_frequencies(self):
        frequencies = self.cleaned_data['frequencies']
        if frequencies in (None, ''):
            return None
        field = ListField(cast=int)
        if not isinstance(frequencies, list):
            raise ValidationError('Expected a list of integer vectors')
        return [field.clean(k) for k in frequencies]

    def clean(self):
        cleaned_data = super(TorusForm, self).clean()
        dim = cleaned_data.get('dim') or 2
        x0 = cleaned_data.get('x0')
        if x0 is not None and len(x0) != dim:
            self.add_error('x0', 'Expected {0} coordinates'.format(dim))
        for k in cleaned_data.get('frequencies') or []:
            if len(k) != dim:
                self.add_error('frequencies', 'Every frequency needs {0} entries'.format(dim))
                break
        return cleaned_data


class TranslateModularForm(ScenarioForm):
    scenario_name = TRANSLATE_MODULAR
    g0 = MatrixField(required=False)
    control = forms.BooleanField(required=False)

    nested_form_configs = nested(norm=NormSpecForm)

    def clean_g0(self):
        g0 = self.cleaned_data['g0']
        if g0 is not None and (g0.shape != (2, 2) or abs(np.linalg.det(g0) - 1) > 1e-9):
            raise ValidationError('g0 must be a 2x2 matrix of determinant 1')
        return g0


class CounterexampleD2Form(ScenarioForm):
    scenario_name = COUNTEREXAMPLE_D2
    c = forms.FloatField(required=False)
    n = forms.IntegerField(required=False, min_value=1, max_value=8)


class NonbalancedForm(ScenarioForm):
    scenario_name = NONBALANCED
    l = forms.IntegerField(required=False, min_value=3, max_value=4)  # noqa: E741
    cap = forms.FloatField(required=False, min_value=0)
    p_values = forms.Field(required=False)

    def clean_p_values(self):
        p_values = self.cleaned_data['p_values']
        if p_values in (None, ''):
            return None
        if not isinstance(p_values, list) or len(p_values) < 2:
            raise ValidationError('Expected at least two norm exponents')
        try:
            return [float(p) for p in p_values]
        except (TypeError, ValueError):
            raise ValidationError('Norm exponents must be numbers or inf')


class OppenheimForm(ScenarioForm):
    scenario_name = OPPENHEIM
    form = ListField(required=False, length=3)
    box = ObjectField(required=False)

    def clean_box(self):
        box = self.cleaned_data['box']
        if box is None:
            return None
        try:
            return GramBox(box['lo'], box['hi'])
        except (KeyError, TypeError, ValueError) as e:
            raise ValidationError('Invalid Gram box: {0}'.format(e))


class VolumeSweepForm(ScenarioForm):
    scenario_name = VOLUME_SWEEP

    nested_form_configs = [
        NestedFormConfig(cls=GroupSpecForm, key='group', required=True),
        NestedFormConfig(cls=NormSpecForm, key='norm', required=True),
        NestedFormConfig(cls=MethodForm, key='method'),
    ]

    def clean(self):
        cleaned_data = super(VolumeSweepForm, self).clean()
        if not cleaned_data.get('thresholds'):
            self.add_error('thresholds', 'A volume sweep needs thresholds')
        return cleaned_data


class AuditForm(ScenarioForm):
    scenario_name = AUDIT
    condition = forms.ChoiceField(choices=[(name, name) for name in ('uc', 'i1', 'i2', 'd1', 'd2')])
    epsilon = forms.FloatField(required=False)
    subgroup = forms.ChoiceField(choices=[('cartan', 'cartan'), ('unipotent', 'unipotent'), ('spiral', 'spiral')],
                                 required=False)
    c = forms.FloatField(required=False)
    pairs = forms.Field(required=False)
    g1 = MatrixField(required=False)
    g2 = MatrixField(required=False)
    g_samples = forms.IntegerField(required=False, min_value=1)
    u_samples = forms.IntegerField(required=False, min_value=1)
    tolerance = forms.FloatField(required=False, min_value=0)

    nested_form_configs = nested(group=GroupSpecForm, norm=NormSpecForm, lattice=LatticeSpecForm,
                                 method=MethodForm)

    def clean_pairs(self):
        pairs = self.cleaned_data['pairs']
        if pairs in (None, ''):
            return None
        field = MatrixField()
        if not isinstance(pairs, list) or not all(isinstance(pair, list) and len(pair) == 2 for pair in pairs):
            raise ValidationError('Expected a list of [g1, g2] pairs')
        return [(field.clean(g1), field.clean(g2)) for g1, g2 in pairs]

    def clean(self):
        cleaned_data = super(AuditForm, self).clean()
        subgroup = cleaned_data.get('subgroup') or 'cartan'
        condition = cleaned_data.get('condition')
        if subgroup == 'cartan' and condition in ('i1', 'i2', 'd1', 'd2') and self.data.get('group') is None:
            self.add_error('group', 'The {0} audit needs a group'.format(condition))
        if subgroup != 'spiral' and self.data.get('norm') is None:
            self.add_error('norm', 'The audit needs a norm')
        if subgroup == 'unipotent' and condition not in ('d1', 'd2'):
            self.add_error('subgroup', 'The unipotent subgroup is audited for d1 and d2 only')
        if subgroup == 'spiral' and condition not in ('i1', 'd1', 'd2'):
            self.add_error('subgroup', 'The spiral subgroup is audited for i1, d1 and d2 only')
        return cleaned_data


SCENARIO_FORMS = {
    form.scenario_name: form for form in (
        LedrappierForm, TorusForm, TranslateModularForm, CounterexampleD2Form, NonbalancedForm, OppenheimForm,
        VolumeSweepForm, AuditForm,
    )
}


def parse_config(data) -> ScenarioConfig:
    """
    Validates a decoded JSON configuration.

    :raises ConfigError: with the form errors when the configuration is invalid
    """
    if not isinstance(data, dict):
        raise ConfigError({'__all__': ['The configuration must be a JSON object']})
    form_class = SCENARIO_FORMS.get(data.get('scenario'))
    if form_class is None:
        raise ConfigError({'scenario': ['Unknown scenario {0!r}, expected one of {1}'.format(
            data.get('scenario'), ', '.join(sorted(SCENARIO_FORMS))
        )]})

    form = form_class(data=data)
    if not form.is_valid():
        raise ConfigError({key: list(messages) for key, messages in form.errors.items()})
    return form.save()


def load_config(path) -> ScenarioConfig:
    """
    :raises ConfigError: when the file is missing, is not JSON or does not validate
    """
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ConfigError({'__all__': ['Cannot read {0}: {1}'.format(path, e)]})
    return parse_config(data)
