# flake8: noqa
from .forms import SCENARIO_FORMS, ConfigError, ScenarioConfig, load_config, parse_config
from .manifest import RunManifest, StepStatus
from .plots import UnknownSeries, emit_plot_data
from .scenarios import SCENARIOS, run_scenario
