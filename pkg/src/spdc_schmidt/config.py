"""Experiment configuration loaded from TOML.

Every section and key is optional; omitted values take the defaults below.
Unknown sections or keys are rejected. See ``EXAMPLE_CONFIG`` for the
annotated format.
"""
import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .errors import ConfigError
from .ghost import DEFAULT_SLIT_UM, DEFAULT_WIDTHS_PER_UM
from .kernel import OpticalParams, fit_gaussian_width_to_sinc
from .modes import MAX_ORDER

EXAMPLE_CONFIG = """\
# spdc-schmidt experiment configuration (TOML). All keys optional.

[optical]
a_mrad = 5.8                 # pump angular divergence (Gaussian width)
b_mrad = 20.0                # phase-matching width; omit to fit it to the sinc kernel
crystal_length_mm = 2.0      # sets c_sinc together with the pump wavelength
pump_wavelength_nm = 325.0
# c_sinc = 0.0024            # override sinc coefficient, mrad^-2

[grid]
extent_widths = 8.0          # 1D half-width in Schmidt-mode widths
n_points = 1025              # odd
extent_widths_2d = 6.0       # tensor grid for non-separable / 2D decompositions
n_points_2d = 33             # odd, per axis

[schmidt]
truncation_tol = 1e-6
max_order = 4                # highest HG index n, m measured
kernel = "double_gaussian"   # or "exact": kernel used by correlate/tomography/ghost
svd_method = "jacobi"        # or "lapack"

[noise]
background = 0.0             # dark counts per mode, added before sampling
total_counts = 100000.0      # expected signal counts summed over measured modes
seed = 12345
n_bootstrap = 200
noiseless = false            # use expected counts instead of Poisson draws
trials = 100                 # seeded noisy repeats for correlate visibility stats

[calibration]
slit_width_um = 200.0
slit_widths_per_um = 0.00175 # mode widths per micron (200 um <-> 0.35 widths)
fiber_mismatch = 1.0         # fiber-mode width / psi_0 width
scan_points = 201            # positions per scan
scan_extent_widths = 4.0     # scans cover +-this many mode widths
"""


@dataclass
class OpticalSection:
    a_mrad: float = 5.8
    b_mrad: float | None = 20.0
    crystal_length_mm: float = 2.0
    pump_wavelength_nm: float = 325.0
    c_sinc: float | None = None


@dataclass
class GridSection:
    extent_widths: float = 8.0
    n_points: int = 1025
    extent_widths_2d: float = 6.0
    n_points_2d: int = 33


@dataclass
class SchmidtSection:
    truncation_tol: float = 1e-6
    max_order: int = 4
    kernel: str = "double_gaussian"
    svd_method: str = "jacobi"


@dataclass
class NoiseSection:
    background: float = 0.0
    total_counts: float = 1e5
    seed: int = 12345
    n_bootstrap: int = 200
    noiseless: bool = False
    trials: int = 100


@dataclass
class CalibrationSection:
    slit_width_um: float = DEFAULT_SLIT_UM
    slit_widths_per_um: float = DEFAULT_WIDTHS_PER_UM
    fiber_mismatch: float = 1.0
    scan_points: int = 201
    scan_extent_widths: float = 4.0


@dataclass
class ExperimentConfig:
    optical: OpticalSection = field(default_factory=OpticalSection)
    grid: GridSection = field(default_factory=GridSection)
    schmidt: SchmidtSection = field(default_factory=SchmidtSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    calibration: CalibrationSection = field(default_factory=CalibrationSection)

    def __post_init__(self):
        _validate(self)

    def params(self):
        """OpticalParams; a missing b is fitted to the sinc phase-matching factor."""
        o = self.optical
        kwargs = dict(
            crystal_length=o.crystal_length_mm * 1e-3,
            pump_wavelength=o.pump_wavelength_nm * 1e-9,
            c_sinc=o.c_sinc,
        )
        b = o.b_mrad
        if b is None:
            b = fit_gaussian_width_to_sinc(OpticalParams(o.a_mrad, 1.0, **kwargs))
        return OpticalParams(o.a_mrad, b, **kwargs)

    def to_dict(self):
        return dataclasses.asdict(self)


_SECTIONS = {
    "optical": OpticalSection,
    "grid": GridSection,
    "schmidt": SchmidtSection,
    "noise": NoiseSection,
    "calibration": CalibrationSection,
}


def _coerce(name, value, annotation):
    optional = "None" in str(annotation)
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name} may not be null")
    base = str(annotation).replace(" | None", "")
    if base in ("bool", "<class 'bool'>"):
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be a boolean, got {value!r}")
        return value
    if base in ("int", "<class 'int'>"):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return value
    if base in ("float", "<class 'float'>"):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if base in ("str", "<class 'str'>"):
        if not isinstance(value, str):
            raise ConfigError(f"{name} must be a string, got {value!r}")
        return value
    raise ConfigError(f"unsupported field type for {name}")


def from_dict(data):
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s): {sorted(unknown)}")
    sections = {}
    for name, cls in _SECTIONS.items():
        raw = data.get(name, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"[{name}] must be a table")
        fields = {f.name: f for f in dataclasses.fields(cls)}
        bad = set(raw) - set(fields)
        if bad:
            raise ConfigError(f"unknown key(s) in [{name}]: {sorted(bad)}")
        kwargs = {k: _coerce(f"{name}.{k}", v, fields[k].type) for k, v in raw.items()}
        sections[name] = cls(**kwargs)
    return ExperimentConfig(**sections)


def load_config(path=None):
    """Read a TOML config; ``None`` gives the defaults."""
    if path is None:
        return ExperimentConfig()
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return from_dict(data)


def _positive(name, value):
    if not value > 0:
        raise ConfigError(f"{name} must be positive, got {value}")


def _odd(name, value, minimum=3):
    if value < minimum or value % 2 == 0:
        raise ConfigError(f"{name} must be odd and >= {minimum}, got {value}")


def _validate(cfg):
    o, g, s, n, c = cfg.optical, cfg.grid, cfg.schmidt, cfg.noise, cfg.calibration
    _positive("optical.a_mrad", o.a_mrad)
    if o.b_mrad is not None:
        _positive("optical.b_mrad", o.b_mrad)
    _positive("optical.crystal_length_mm", o.crystal_length_mm)
    _positive("optical.pump_wavelength_nm", o.pump_wavelength_nm)
    if o.c_sinc is not None:
        _positive("optical.c_sinc", o.c_sinc)
    _positive("grid.extent_widths", g.extent_widths)
    _positive("grid.extent_widths_2d", g.extent_widths_2d)
    _odd("grid.n_points", g.n_points)
    _odd("grid.n_points_2d", g.n_points_2d)
    if not 0 < s.truncation_tol < 1:
        raise ConfigError(f"schmidt.truncation_tol must be in (0, 1), got {s.truncation_tol}")
    if not 0 <= s.max_order <= MAX_ORDER:
        raise ConfigError(f"schmidt.max_order must be in [0, {MAX_ORDER}], got {s.max_order}")
    if s.kernel not in ("double_gaussian", "exact"):
        raise ConfigError(f"schmidt.kernel must be 'double_gaussian' or 'exact', got {s.kernel!r}")
    if s.svd_method not in ("jacobi", "lapack"):
        raise ConfigError(f"schmidt.svd_method must be 'jacobi' or 'lapack', got {s.svd_method!r}")
    if n.background < 0:
        raise ConfigError(f"noise.background must be >= 0, got {n.background}")
    _positive("noise.total_counts", n.total_counts)
    if n.n_bootstrap != 0 and n.n_bootstrap < 100:
        raise ConfigError(f"noise.n_bootstrap must be 0 or >= 100, got {n.n_bootstrap}")
    if n.trials < 1:
        raise ConfigError(f"noise.trials must be >= 1, got {n.trials}")
    if c.slit_width_um < 0:
        raise ConfigError(f"calibration.slit_width_um must be >= 0, got {c.slit_width_um}")
    _positive("calibration.slit_widths_per_um", c.slit_widths_per_um)
    _positive("calibration.fiber_mismatch", c.fiber_mismatch)
    _positive("calibration.scan_extent_widths", c.scan_extent_widths)
    if c.scan_points < 5:
        raise ConfigError(f"calibration.scan_points must be >= 5, got {c.scan_points}")
