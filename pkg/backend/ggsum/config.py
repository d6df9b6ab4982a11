"""
Run configuration for the GGSUM command line.

A RunConfig is assembled from an optional ``key = value`` file and command
line flags (flags win). Every key is validated and coerced before anything is
computed; unknown keys are errors. The same ``key = value`` form is echoed
into CSV headers and parses back to an equivalent RunConfig.

All SNR-like inputs are in dB; internal math is linear with
value_linear = 10^(dB/10).
"""

import logging
import math
from dataclasses import dataclass, fields, replace

import numpy as np

from .distributions import DEFAULT_QUAD, QuadSpec
from .error_manager import ConfigError, ValidationError

# Setup logging
logger = logging.getLogger(__name__)


def db_to_linear(value_db):
    """Convert dB to linear: 10^(dB/10)."""
    if np.ndim(value_db):
        return 10.0 ** (np.asarray(value_db, dtype=float) / 10.0)
    return 10.0 ** (float(value_db) / 10.0)


def linear_to_db(value):
    """Convert linear to dB: 10·log10(value)."""
    if np.ndim(value):
        return 10.0 * np.log10(np.asarray(value, dtype=float))
    if not value > 0:
        raise ValidationError(f"cannot express {value} in dB")
    return 10.0 * math.log10(value)


def parse_sweep(text):
    """
    Parse a "start:stop:step" sweep, stop inclusive.

    Args:
        text (str): Sweep definition, e.g. "0:25:1"; a single number is a one-point sweep

    Returns:
        list: Strictly increasing abscissa values
    """
    parts = [p.strip() for p in str(text).split(':')]
    try:
        numbers = [float(p) for p in parts]
    except ValueError as e:
        raise ConfigError(f"sweep must be 'start:stop:step', got {text!r}") from e
    if len(numbers) == 1:
        return numbers
    if len(numbers) != 3:
        raise ConfigError(f"sweep must be 'start:stop:step', got {text!r}")
    start, stop, step = numbers
    if not step > 0 or stop < start:
        raise ConfigError(f"sweep needs step > 0 and stop >= start, got {text!r}")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + i * step, 12) for i in range(count)]


def _as_int(value):
    number = float(value)
    if not number.is_integer():
        raise ValueError(f"{value!r} is not an integer")
    return int(number)


def _as_bool(value):
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ('1', 'true', 'yes', 'on'):
        return True
    if text in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError(f"{value!r} is not a boolean")


def _list_of(convert):
    def parse(value):
        if isinstance(value, (list, tuple)):
            items = value
        else:
            items = [p for p in str(value).split(',') if p.strip()]
        return tuple(convert(item) for item in items)
    return parse


def _choice(*allowed):
    def parse(value):
        text = str(value).strip().lower()
        if text not in allowed:
            raise ValueError(f"{value!r} is not one of {', '.join(allowed)}")
        return text
    return parse


def _text(value):
    return str(value).strip()


# key -> converter
FIELD_TYPES = {
    'command': _text,
    'k': float,
    'm': float,
    'omega': float,
    'n': float,
    'x': _list_of(float),
    'L': _as_int,
    'm_list': _list_of(_as_int),
    'omega_list': _list_of(float),
    'swap': _as_bool,
    'method': _choice('regression', 'moment_matching'),
    'objective': _choice('relative', 'absolute'),
    'mod': _choice('bpsk', 'dbpsk'),
    'gbar_db': float,
    'gbar1_db': float,
    'gbar_list_db': _list_of(float),
    'delta': float,
    'threshold_db': float,
    'M': _as_int,
    'N': _as_int,
    'a': float,
    'a_list': _list_of(_as_int),
    'io': float,
    'io_list': _list_of(float),
    'ratio': float,
    'eta': float,
    'n0': float,
    'mu_db': float,
    'sweep': _text,
    'target': float,
    'quad_rel_tol': float,
    'quad_abs_tol': float,
    'quad_max_refinements': _as_int,
    'quad_tail_mass_tol': float,
    'samples': _as_int,
    'seed': _as_int,
    'chunk_size': _as_int,
    'workers': _as_int,
    'output': _text,
}


@dataclass(frozen=True)
class RunConfig:
    """Validated parameters of one CLI run; unset keys are None."""

    command: str = None
    k: float = None
    m: float = None
    omega: float = None
    n: float = None
    x: tuple = None
    L: int = None
    m_list: tuple = None
    omega_list: tuple = None
    swap: bool = None
    method: str = None
    objective: str = None
    mod: str = None
    gbar_db: float = None
    gbar1_db: float = None
    gbar_list_db: tuple = None
    delta: float = None
    threshold_db: float = None
    M: int = None
    N: int = None
    a: float = None
    a_list: tuple = None
    io: float = None
    io_list: tuple = None
    ratio: float = None
    eta: float = None
    n0: float = None
    mu_db: float = None
    sweep: str = None
    target: float = None
    quad_rel_tol: float = None
    quad_abs_tol: float = None
    quad_max_refinements: int = None
    quad_tail_mass_tol: float = None
    samples: int = None
    seed: int = None
    chunk_size: int = None
    workers: int = None
    output: str = None

    @classmethod
    def from_mapping(cls, mapping):
        """
        Build a RunConfig from raw strings or values.

        Raises:
            ConfigError: Unknown key or unparsable value
        """
        values = {}
        for key, raw in mapping.items():
            if key not in FIELD_TYPES:
                raise ConfigError(f"unknown configuration key: {key}")
            if raw is None:
                continue
            try:
                values[key] = FIELD_TYPES[key](raw)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"invalid value for {key}: {e}") from e
        return cls(**values)

    @classmethod
    def from_echo(cls, lines):
        """Re-parse ``# config.<key> = value`` echo lines (or plain ``key = value`` lines)."""
        mapping = {}
        for line in lines:
            text = line.strip().lstrip('#').strip()
            if text.startswith('config.'):
                text = text[len('config.'):]
            elif line.strip().startswith('#'):
                continue
            if '=' not in text:
                continue
            key, value = (part.strip() for part in text.split('=', 1))
            mapping[key] = value
        return cls.from_mapping(mapping)

    def merged(self, overrides):
        """Copy with every non-None field of ``overrides`` applied."""
        changes = {f.name: getattr(overrides, f.name) for f in fields(overrides) if getattr(overrides, f.name) is not None}
        return replace(self, **changes)

    def as_dict(self):
        return {f.name: getattr(self, f.name) for f in fields(self) if getattr(self, f.name) is not None}

    def get(self, key, default=None):
        value = getattr(self, key)
        return default if value is None else value

    def require(self, *keys):
        """Raise ConfigError naming the first missing key."""
        for key in keys:
            if getattr(self, key) is None:
                raise ConfigError(f"missing required parameter: {key}")

    def quad_spec(self):
        """QuadSpec with any quad_* overrides applied."""
        return QuadSpec(
            rel_tol=self.get('quad_rel_tol', DEFAULT_QUAD.rel_tol),
            abs_tol=self.get('quad_abs_tol', DEFAULT_QUAD.abs_tol),
            max_refinements=self.get('quad_max_refinements', DEFAULT_QUAD.max_refinements),
            tail_mass_tol=self.get('quad_tail_mass_tol', DEFAULT_QUAD.tail_mass_tol),
        )

    def sweep_values(self):
        return parse_sweep(self.sweep) if self.sweep is not None else None


def _format_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ','.join(_format_value(v) for v in value)
    return str(value)


def config_echo(cfg):
    """
    Echo lines for a RunConfig, one ``key = value`` per set field.

    Floats use repr so they parse back to the identical value.
    """
    return [f"{key} = {_format_value(value)}" for key, value in cfg.as_dict().items()]


def load_config_file(path):
    """
    Read a ``key = value`` configuration file.

    Args:
        path (str): File path; '#' starts a comment, lists are comma-separated

    Returns:
        RunConfig: Parsed configuration
    """
    mapping = {}
    try:
        with open(path, 'r', encoding='utf-8') as handle:
            for number, line in enumerate(handle, start=1):
                text = line.split('#', 1)[0].strip()
                if not text:
                    continue
                if '=' not in text:
                    raise ConfigError(f"{path}:{number}: expected 'key = value', got {line.strip()!r}")
                key, value = (part.strip() for part in text.split('=', 1))
                mapping[key] = value
    except OSError as e:
        raise ConfigError(f"cannot read configuration file {path}: {e}") from e
    logger.info(f"Loaded {len(mapping)} configuration keys from {path}")
    return RunConfig.from_mapping(mapping)
