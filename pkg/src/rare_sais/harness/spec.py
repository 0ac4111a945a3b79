"""Experiment configuration files.

A spec file is TOML. See ``docs/formats.md`` for the full grammar; in short::

    benchmark = "s1"            # or a [benchmark] table with name, d_x, params
    repetitions = 100
    quick_repetitions = 20
    master_seed = 1

    [sweep]
    K = [50, 100, 150, 200]
    N = [2, 4, 6]

    [[methods]]
    method = "sais"
    lambda = 0.5

A single-method spec may put ``method`` and its fields at the top level.
"""
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ParseError, ValidationError
from ..limitstate import _REGISTRY, benchmark_names, get_limit_state

METHODS = ("crude_mc", "ss_is", "ce_pmc", "sais")

# fields each method accepts besides "method" and "label"
_METHOD_FIELDS = {
    "crude_mc": {"samples"},
    "ss_is": {"K", "rho", "max_iterations", "sigma"},
    "ce_pmc": {"N", "K", "rho", "max_iterations", "sigma", "init_box"},
    "sais": {"N", "K", "rho", "lambda", "max_iterations", "sigma", "init_box",
             "eta_schedule", "threshold_order", "ess_scope", "lw_centered"},
}
# sweep axes that change each method's runs
_METHOD_AXES = {
    "crude_mc": ("d_x",),
    "ss_is": ("K", "d_x"),
    "ce_pmc": ("N", "K", "d_x"),
    "sais": ("N", "K", "d_x"),
}
SWEEP_AXES = ("N", "K", "d_x")
_TOP_LEVEL = {"benchmark", "repetitions", "quick_repetitions", "master_seed", "output_dir",
              "sweep", "methods", "method", "label"}

DEFAULT_N = 6
DEFAULT_K = 200
DEFAULT_REPETITIONS = 100
DEFAULT_QUICK_REPETITIONS = 20


@dataclass
class MethodSpec:
    method: str
    label: str
    options: dict

    def uses_axis(self, axis):
        return axis in _METHOD_AXES[self.method]


@dataclass
class BenchmarkSpec:
    name: str
    d_x: int
    params: dict = field(default_factory=dict)

    def limit_state(self, d_x=None):
        return get_limit_state(self.name, dim=self.d_x if d_x is None else d_x, **self.params)


@dataclass
class ExperimentSpec:
    benchmark: BenchmarkSpec
    methods: list
    repetitions: int = DEFAULT_REPETITIONS
    quick_repetitions: int = DEFAULT_QUICK_REPETITIONS
    master_seed: int = 0
    sweep: dict = field(default_factory=dict)
    output_dir: str | None = None
    source: str | None = None

    def grid(self, method):
        """Grid points ``{"N", "K", "d_x"}`` for one method, in sweep order."""
        points = [{}]
        for axis in SWEEP_AXES:
            values = self.sweep.get(axis)
            if values is None or not method.uses_axis(axis):
                continue
            points = [{**p, axis: v} for p in points for v in values]
        return [self.resolve(method, p) for p in points]

    def resolve(self, method, point):
        o = method.options
        n = 1 if method.method in ("ss_is", "crude_mc") else point.get("N", o.get("N", DEFAULT_N))
        if method.method == "crude_mc":
            k = o["samples"]
        else:
            k = point.get("K", o.get("K", DEFAULT_K))
        return {"N": int(n), "K": int(k), "d_x": int(point.get("d_x", self.benchmark.d_x))}


def _position(exc):
    line = getattr(exc, "lineno", None)
    col = getattr(exc, "colno", None)
    if line is None:
        m = re.search(r"line (\d+), column (\d+)", str(exc))
        if m:
            line, col = int(m.group(1)), int(m.group(2))
    return line, col


def parse_spec_text(text, source=None):
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        line, col = _position(exc)
        raise ParseError(str(exc), line, col) from None
    return _build(raw, source)


def parse_spec(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    return parse_spec_text(text, str(path))


def _int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ValidationError(name, f"{name} must be an integer")
    value = int(value)
    if minimum is not None and value < minimum:
        raise ValidationError(name, f"{name} must be >= {minimum}")
    return value


def _real(value, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValidationError(name, f"{name} must be a number")
    return float(value)


def _benchmark(raw):
    if "benchmark" not in raw:
        raise ValidationError("benchmark", "benchmark is required")
    entry = raw["benchmark"]
    if isinstance(entry, str):
        entry = {"name": entry}
    if not isinstance(entry, dict) or "name" not in entry:
        raise ValidationError("benchmark", "benchmark must be a name or a table with a name")
    name = entry["name"]
    if name not in benchmark_names():
        raise ValidationError("benchmark.name", f"unknown benchmark {name!r}")
    _, defaults, fixed_dim, _ = _REGISTRY[name]
    params = {}
    for key, value in entry.items():
        if key in ("name", "d_x"):
            continue
        if key not in defaults:
            raise ValidationError(f"benchmark.{key}", f"benchmark {name} has no parameter {key!r}")
        params[key] = _real(value, f"benchmark.{key}")
    d_x = entry.get("d_x", fixed_dim)
    d_x = get_limit_state(name).dim if d_x is None else _int(d_x, "benchmark.d_x", 1)
    if fixed_dim is not None and d_x != fixed_dim:
        raise ValidationError("benchmark.d_x", f"{name} is defined for d_x = {fixed_dim} only")
    return BenchmarkSpec(name, d_x, params)


def _method(entry, index, default_rho, default_box):
    where = f"methods[{index}]"
    if not isinstance(entry, dict):
        raise ValidationError(where, "each method must be a table")
    name = entry.get("method")
    if name not in METHODS:
        raise ValidationError(f"{where}.method", f"method must be one of {METHODS}")
    allowed = _METHOD_FIELDS[name]
    options = {}
    for key, value in entry.items():
        if key in ("method", "label"):
            continue
        if key not in allowed:
            raise ValidationError(f"{where}.{key}", f"{key!r} is not a field of {name}")
        options[key] = value
    for key in ("N", "K", "samples", "max_iterations"):
        if key in options:
            options[key] = _int(options[key], f"{where}.{key}", 1)
    if name == "crude_mc":
        if "samples" not in options:
            raise ValidationError(f"{where}.samples", "crude_mc needs samples")
    else:
        options["rho"] = _real(options.get("rho", default_rho), f"{where}.rho")
        if not 0.0 < options["rho"] < 1.0:
            raise ValidationError(f"{where}.rho", "quantile must lie in (0,1)")
        options.setdefault("max_iterations", 50)
        options["sigma"] = _real(options.get("sigma", 1.0), f"{where}.sigma")
        if options["sigma"] <= 0:
            raise ValidationError(f"{where}.sigma", "sigma must be positive")
    if name in ("sais", "ce_pmc"):
        box = options.get("init_box", list(default_box))
        if (not isinstance(box, list) or len(box) != 2
                or not _real(box[0], f"{where}.init_box") < _real(box[1], f"{where}.init_box")):
            raise ValidationError(f"{where}.init_box", "init_box must be [low, high] with low < high")
        options["init_box"] = (float(box[0]), float(box[1]))
    if name == "sais":
        lam = _real(options.get("lambda", 0.5), f"{where}.lambda")
        if not 0.0 < lam < 1.0:
            raise ValidationError(f"{where}.lambda", "forgetting factor must lie in (0,1)")
        options["lambda"] = lam
        choices = {"eta_schedule": ("inverse_t", "beta_over_t"),
                   "threshold_order": ("descending", "ascending"),
                   "ess_scope": ("active", "assigned")}
        for key, allowed_values in choices.items():
            if key in options and options[key] not in allowed_values:
                raise ValidationError(f"{where}.{key}", f"{key} must be one of {allowed_values}")
        if "lw_centered" in options and not isinstance(options["lw_centered"], bool):
            raise ValidationError(f"{where}.lw_centered", "lw_centered must be true or false")
    label = entry.get("label", name)
    if not isinstance(label, str) or not label or "," in label:
        raise ValidationError(f"{where}.label", "label must be a non-empty string without commas")
    return MethodSpec(name, label, options)


def _sweep(raw, bench):
    sweep = raw.get("sweep", {})
    if not isinstance(sweep, dict):
        raise ValidationError("sweep", "sweep must be a table")
    out = {}
    for axis, values in sweep.items():
        if axis not in SWEEP_AXES:
            raise ValidationError(f"sweep.{axis}", f"sweep axes are {SWEEP_AXES}")
        if not isinstance(values, list) or not values:
            raise ValidationError(f"sweep.{axis}", "sweep values must be a non-empty list")
        values = [_int(v, f"sweep.{axis}", 1) for v in values]
        if len(set(values)) != len(values):
            raise ValidationError(f"sweep.{axis}", "sweep values must be distinct")
        out[axis] = values
    if "d_x" in out:
        fixed = _REGISTRY[bench.name][2]
        if fixed is not None and out["d_x"] != [fixed]:
            raise ValidationError("sweep.d_x", f"{bench.name} is defined for d_x = {fixed} only")
    return out


def _build(raw, source):
    unknown = set(raw) - _TOP_LEVEL
    if "method" not in raw:
        if unknown:
            key = sorted(unknown)[0]
            raise ValidationError(key, f"unknown top-level field {key!r}")
    bench = _benchmark(raw)
    default_rho = 0.2 if bench.name == "s4" else 0.1
    default_box = (-1.0, 1.0) if bench.name == "s4" else (-4.0, 4.0)
    if "method" in raw:
        if "methods" in raw:
            raise ValidationError("method", "use either a top-level method or [[methods]], not both")
        single = {k: v for k, v in raw.items() if k not in _TOP_LEVEL or k in ("method", "label")}
        entries = [single]
    else:
        entries = raw.get("methods")
        if not isinstance(entries, list) or not entries:
            raise ValidationError("methods", "at least one method is required")
    methods = [_method(e, i, default_rho, default_box) for i, e in enumerate(entries)]
    labels = [m.label for m in methods]
    if len(set(labels)) != len(labels):
        raise ValidationError("methods", "method labels must be unique; add a label field")
    spec = ExperimentSpec(
        benchmark=bench,
        methods=methods,
        repetitions=_int(raw.get("repetitions", DEFAULT_REPETITIONS), "repetitions", 1),
        quick_repetitions=_int(raw.get("quick_repetitions", DEFAULT_QUICK_REPETITIONS),
                               "quick_repetitions", 1),
        master_seed=_int(raw.get("master_seed", 0), "master_seed", 0),
        sweep=_sweep(raw, bench),
        output_dir=raw.get("output_dir"),
        source=source,
    )
    for m in methods:
        if m.method == "sais":
            for point in spec.grid(m):
                if point["N"] * point["K"] * m.options["rho"] < 1:
                    raise ValidationError("rho", "N * K * rho must be at least 1")
    return spec
