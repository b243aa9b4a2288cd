"""Parameter sweeps, figure presets and CSV emission."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import __version__
from .channel import WiretapParams
from .copula import CopulaError, CopulaSpec, Family
from .metrics import GTH_NEGATIVE, VALID, Method, evaluate, sop_closed_form
from .secrecy import SecrecyRegime

AXES = ("gbar_m_db", "si_ratio_db", "theta", "zeta", "R_s")
FIXED_KEYS = ("gbar_m_db", "gbar_e_db", "gbar_ms_db", "gbar_es_db", "R_s")
CSV_COLUMNS = ("axis", "regime", "family", "param", "method", "value", "error_bound",
               "n_samples", "validity_flag", "scenario")

CONCORDANCE_TOL = 1e-5
DISCREPANCY = "discrepancy"


class ConfigError(ValueError):
    """Malformed or incomplete sweep configuration."""


@dataclass(frozen=True)
class SweepSpec:
    """One swept axis over a grid of scenarios, regimes, copulas and methods.

    ``fixed`` holds every non-swept parameter (SNRs in dB). Each entry of
    ``scenarios`` is a partial override of ``fixed``; one curve per
    scenario, e.g. the eavesdropper SNRs of a figure.
    """

    metric: str
    axis: str
    axis_range: tuple
    fixed: dict
    regimes: tuple = (SecrecyRegime.COROLLARY1, SecrecyRegime.COROLLARY2)
    copulas: tuple = (CopulaSpec.fgm(1.0),)
    methods: tuple = (Method.CLOSED_FORM, Method.QUADRATURE, Method.MONTE_CARLO)
    scenarios: tuple = ({},)
    mc_n: int = 10**5
    seed: int = 0
    tol: float = 1e-8
    sop_piecewise: bool = False
    notes: tuple = field(default=())

    def __post_init__(self):
        metric = self.metric.lower()
        if metric not in ("asc", "sop"):
            raise ConfigError(f"metric must be 'asc' or 'sop', got {self.metric!r}")
        object.__setattr__(self, "metric", metric)
        if self.axis not in AXES:
            raise ConfigError(f"axis must be one of {AXES}, got {self.axis!r}")
        if len(self.axis_range) != 3:
            raise ConfigError("axis_range must be (start, stop, step)")
        start, stop, step = (float(v) for v in self.axis_range)
        if step == 0 or (stop - start) * step < 0:
            raise ConfigError("axis_range must be nonempty and monotone")
        object.__setattr__(self, "axis_range", (start, stop, step))
        object.__setattr__(self, "regimes", tuple(SecrecyRegime(r) for r in self.regimes))
        object.__setattr__(self, "methods", tuple(Method(m) for m in self.methods))
        object.__setattr__(self, "scenarios", tuple(dict(s) for s in self.scenarios) or ({},))
        if not self.regimes or not self.copulas or not self.methods:
            raise ConfigError("regimes, copulas and methods must be nonempty")
        if Method.MONTE_CARLO in self.methods and self.mc_n < 1:
            raise ConfigError("mc_n must be >= 1 when monte_carlo is selected")
        unknown = set(self.fixed) - set(FIXED_KEYS)
        for s in self.scenarios:
            unknown |= set(s) - set(FIXED_KEYS)
        if unknown:
            raise ConfigError(f"unknown fixed parameters: {sorted(unknown)}")
        for s in self.scenarios:
            missing = [k for k in self.required_keys() if k not in {**self.fixed, **s}]
            if missing:
                raise ConfigError(f"missing fixed parameters: {missing}")

    def required_keys(self):
        keys = {"gbar_m_db", "gbar_e_db", "gbar_ms_db", "gbar_es_db"}
        if self.metric == "sop":
            keys.add("R_s")
        if self.axis == "si_ratio_db":
            keys.discard("gbar_ms_db")
        keys.discard(self.axis)
        return sorted(keys)

    def axis_values(self):
        start, stop, step = self.axis_range
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(n)]


@dataclass(frozen=True)
class ResultRow:
    axis: float
    regime: str
    family: str
    param: float | None
    method: str
    value: float
    error_bound: float
    n_samples: int | None
    validity_flag: str
    scenario: str

    def as_csv(self):
        return [
            _fmt(self.axis), self.regime, self.family, "" if self.param is None else _fmt(self.param),
            self.method, _fmt(self.value), _fmt(self.error_bound),
            "" if self.n_samples is None else str(self.n_samples), self.validity_flag, self.scenario,
        ]


def _fmt(x):
    return repr(float(x))


def _scenario_label(scenario):
    return ";".join(f"{k}={_fmt(v)}" for k, v in sorted(scenario.items()))


def _resolve(spec, scenario, x):
    """Point parameters ``(WiretapParams, R_s)`` for axis value ``x``."""
    vals = {**spec.fixed, **scenario}
    if spec.axis in ("gbar_m_db", "R_s"):
        vals[spec.axis] = x
    elif spec.axis == "si_ratio_db":
        vals["gbar_ms_db"] = vals["gbar_es_db"] + x
    params = WiretapParams.from_db(vals["gbar_m_db"], vals["gbar_e_db"], vals["gbar_ms_db"], vals["gbar_es_db"])
    return params, vals.get("R_s")


def _copulas_at(spec, x):
    if spec.axis == "theta":
        return [CopulaSpec.fgm(x)]
    if spec.axis == "zeta":
        return [CopulaSpec.independence() if x == 0 else CopulaSpec.frank(x)]
    return list(spec.copulas)


def _evaluate_point(spec, scenario, x):
    params, R_s = _resolve(spec, scenario, x)
    label = _scenario_label(scenario)
    rows = []
    for regime in spec.regimes:
        for cop in _copulas_at(spec, x):
            for method in spec.methods:
                rows.append(_one_row(spec, params, R_s, regime, cop, method, x, label))
    return rows


def _one_row(spec, params, R_s, regime, cop, method, x, label):
    base = dict(axis=x, regime=regime.value, family=cop.family.value, param=cop.param,
                method=method.value, scenario=label)
    try:
        if method is Method.CLOSED_FORM and cop.family not in (Family.FGM, Family.INDEPENDENCE):
            raise CopulaError(f"no closed form for {cop.family.value}")
        if method is Method.CLOSED_FORM and spec.metric == "sop":
            est = sop_closed_form(params, cop, R_s, regime, piecewise=spec.sop_piecewise)
        else:
            est = evaluate(spec.metric, method, params, cop, regime, R_s=R_s, tol=spec.tol,
                           n=spec.mc_n, seed=spec.seed)
    except (CopulaError, ValueError, ArithmeticError) as exc:
        return ResultRow(value=math.nan, error_bound=math.nan, n_samples=None,
                         validity_flag=f"error: {exc}", **base)
    return ResultRow(value=est.value, error_bound=est.error_bound, n_samples=est.n_samples,
                     validity_flag=est.validity_flag, **base)


def flag_discrepancies(rows, tol=CONCORDANCE_TOL):
    """Mark closed-form rows that disagree with their quadrature twin.

    Rows already carrying a validity warning are left untouched. Returns
    the updated rows and the number of newly flagged discrepancies.
    """
    quad = {}
    for r in rows:
        if r.method == Method.QUADRATURE.value and not r.validity_flag.startswith("error"):
            quad[(r.scenario, r.axis, r.regime, r.family, r.param)] = r.value
    out, bad = [], 0
    for r in rows:
        key = (r.scenario, r.axis, r.regime, r.family, r.param)
        if r.method == Method.CLOSED_FORM.value and r.validity_flag == VALID and key in quad:
            if not abs(r.value - quad[key]) <= tol:
                r = replace(r, validity_flag=DISCREPANCY)
                bad += 1
        out.append(r)
    return out, bad


def run_sweep(spec, workers=1):
    """Evaluate every requested method at every grid point.

    Rows are ordered by scenario, then axis value, regime, copula and
    method regardless of ``workers``. Per-row failures are recorded in
    ``validity_flag`` rather than raised.
    """
    tasks = [(s, x) for s in spec.scenarios for x in spec.axis_values()]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda t: _evaluate_point(spec, *t), tasks))
    else:
        chunks = [_evaluate_point(spec, *t) for t in tasks]
    return [r for chunk in chunks for r in chunk]


def spec_to_config(spec):
    """Flat ``key = value`` representation, also used as the CSV header."""
    lines = [
        f"metric = {spec.metric}",
        f"axis = {spec.axis}",
        f"axis_start = {_fmt(spec.axis_range[0])}",
        f"axis_stop = {_fmt(spec.axis_range[1])}",
        f"axis_step = {_fmt(spec.axis_range[2])}",
        f"regime = {', '.join(r.value for r in spec.regimes)}",
        f"copula = {', '.join(_copula_token(c) for c in spec.copulas)}",
        f"methods = {', '.join(m.value for m in spec.methods)}",
        f"mc_n = {spec.mc_n}",
        f"seed = {spec.seed}",
        f"tol = {_fmt(spec.tol)}",
        f"sop_piecewise = {str(spec.sop_piecewise).lower()}",
    ]
    lines += [f"{k} = {_fmt(v)}" for k, v in sorted(spec.fixed.items())]
    if spec.scenarios != ({},):
        lines.append("scenarios = " + " | ".join(_scenario_label(s) for s in spec.scenarios))
    return lines


def _copula_token(c):
    return c.family.value if c.param is None else f"{c.family.value}:{_fmt(c.param)}"


def write_csv(rows, spec, stream):
    """Write rows with a ``#`` provenance header; output is byte-stable."""
    stream.write(f"# sisecrecy {__version__}\n")
    stream.write(f"# seed = {spec.seed}\n")
    for line in spec_to_config(spec):
        stream.write(f"# {line}\n")
    for note in spec.notes:
        stream.write(f"# note: {note}\n")
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(r.as_csv())


def rows_to_csv_text(rows, spec):
    buf = io.StringIO()
    write_csv(rows, spec, buf)
    return buf.getvalue()


# --- config files -------------------------------------------------------------------

def _parse_copula(token):
    token = token.strip()
    name, _, param = token.partition(":")
    name = name.strip().lower()
    try:
        fam = Family(name)
    except ValueError:
        raise ConfigError(f"unknown copula family {name!r}") from None
    if fam in (Family.FGM, Family.FRANK):
        if not param:
            raise ConfigError(f"copula {name} needs a parameter, e.g. {name}:1")
        try:
            return CopulaSpec(fam, float(param))
        except CopulaError as exc:
            raise ConfigError(str(exc)) from None
    return CopulaSpec(fam)


def _parse_regimes(text):
    text = text.strip().lower()
    if text == "both":
        return (SecrecyRegime.COROLLARY1, SecrecyRegime.COROLLARY2)
    try:
        return tuple(SecrecyRegime(t.strip()) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"bad regime list {text!r}") from None


def _parse_scenarios(text):
    out = []
    for chunk in text.split("|"):
        scen = {}
        for assign in chunk.split(";"):
            if not assign.strip():
                continue
            k, sep, v = assign.partition("=")
            if not sep:
                raise ConfigError(f"bad scenario assignment {assign!r}")
            scen[k.strip()] = float(v)
        out.append(scen)
    return tuple(out)


def parse_config(text, overrides=None):
    """Build a :class:`SweepSpec` from flat ``key = value`` lines.

    Blank lines and ``#`` comments are ignored. ``overrides`` (e.g. CLI
    flags) replace file values key by key.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        raw[key.strip()] = value.strip()
    for k, v in (overrides or {}).items():
        if v is not None:
            raw[k] = str(v)
    try:
        kw = dict(
            metric=raw.pop("metric"),
            axis=raw.pop("axis"),
            axis_range=(float(raw.pop("axis_start")), float(raw.pop("axis_stop")), float(raw.pop("axis_step"))),
        )
    except KeyError as exc:
        raise ConfigError(f"missing required key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "regime" in raw:
        kw["regimes"] = _parse_regimes(raw.pop("regime"))
    if "copula" in raw:
        kw["copulas"] = tuple(_parse_copula(t) for t in raw.pop("copula").split(",") if t.strip())
    if "methods" in raw:
        try:
            kw["methods"] = tuple(Method(t.strip()) for t in raw.pop("methods").split(",") if t.strip())
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    if "scenarios" in raw:
        kw["scenarios"] = _parse_scenarios(raw.pop("scenarios"))
    try:
        for key, conv in (("mc_n", int), ("seed", int), ("tol", float)):
            if key in raw:
                kw[key] = conv(raw.pop(key))
        if "sop_piecewise" in raw:
            kw["sop_piecewise"] = raw.pop("sop_piecewise").lower() in ("1", "true", "yes")
        fixed = {k: float(raw.pop(k)) for k in list(raw) if k in FIXED_KEYS}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if raw:
        raise ConfigError(f"unknown keys: {sorted(raw)}")
    return SweepSpec(fixed=fixed, **kw)


# --- figure presets ---------------------------------------------------------------------

EVE_SNRS_DB = (-5.0, 0.0, 5.0)
GBAR_M_RANGE = (-10.0, 30.0, 1.0)

_CORRELATION_COPULAS = (
    CopulaSpec.fgm(-1.0),
    CopulaSpec.independence(),
    CopulaSpec.fgm(1.0),
    CopulaSpec.frank(-35.0),
    CopulaSpec.frank(35.0),
    CopulaSpec.frechet_lower(),
    CopulaSpec.frechet_upper(),
)

PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6")


def preset_figure(name):
    """Named sweep preset, one per figure (``fig2`` ... ``fig6``).

    Presets sweep the eavesdropper SNR over ``EVE_SNRS_DB`` and record
    that choice in ``notes``.
    """
    eve = tuple({"gbar_e_db": g} for g in EVE_SNRS_DB)
    eve_note = f"eavesdropper SNR grid {list(EVE_SNRS_DB)} dB chosen by the preset"
    sop_note = ("threshold constant is negative on this SI set at R_s = 1.5; closed_form rows carry "
                "gth_negative, set sop_piecewise = true for the exact closed form")
    if name == "fig2":
        return SweepSpec(
            metric="asc", axis="gbar_m_db", axis_range=GBAR_M_RANGE,
            fixed={"gbar_ms_db": 5.0, "gbar_es_db": -10.0, "R_s": 1.5},
            copulas=(CopulaSpec.fgm(1.0),), scenarios=eve, notes=(eve_note,),
        )
    if name == "fig3":
        return SweepSpec(
            metric="asc", axis="si_ratio_db", axis_range=(-10.0, 20.0, 2.0),
            fixed={"gbar_es_db": -10.0, "R_s": 1.5},
            copulas=(CopulaSpec.fgm(1.0),),
            scenarios=(
                {"gbar_m_db": 10.0, "gbar_e_db": 5.0},
                {"gbar_m_db": 5.0, "gbar_e_db": 5.0},
                {"gbar_m_db": 5.0, "gbar_e_db": 10.0},
            ),
            notes=("scenarios gbar_m >, =, < gbar_e at 10/5, 5/5, 5/10 dB; gbar_es fixed at -10 dB",),
        )
    if name == "fig4":
        return SweepSpec(
            metric="sop", axis="gbar_m_db", axis_range=GBAR_M_RANGE,
            fixed={"gbar_ms_db": 5.0, "gbar_es_db": -5.0, "R_s": 1.5},
            copulas=(CopulaSpec.fgm(1.0),), scenarios=eve, notes=(eve_note, sop_note),
        )
    if name == "fig5":
        return SweepSpec(
            metric="asc", axis="gbar_m_db", axis_range=GBAR_M_RANGE,
            fixed={"gbar_ms_db": 5.0, "gbar_es_db": -10.0, "R_s": 1.5},
            copulas=_CORRELATION_COPULAS, scenarios=eve, notes=(eve_note,),
        )
    if name == "fig6":
        return SweepSpec(
            metric="sop", axis="gbar_m_db", axis_range=GBAR_M_RANGE,
            fixed={"gbar_ms_db": 5.0, "gbar_es_db": -5.0, "R_s": 1.5},
            copulas=_CORRELATION_COPULAS, scenarios=eve, notes=(eve_note, sop_note),
        )
    raise ConfigError(f"unknown preset {name!r}; choose from {PRESETS}")


def gate_spec(spec):
    """Reduce a sweep to what the concordance gate needs: closed form and quadrature
    for copulas that have a closed form."""
    cops = tuple(c for c in spec.copulas if c.family in (Family.FGM, Family.INDEPENDENCE))
    return replace(spec, copulas=cops or spec.copulas,
                   methods=(Method.CLOSED_FORM, Method.QUADRATURE))


def summarize(rows):
    """Counts of rows per validity flag, for console reporting."""
    counts = {}
    for r in rows:
        key = r.validity_flag if not r.validity_flag.startswith("error") else "error"
        counts[key] = counts.get(key, 0) + 1
    return dict(sorted(counts.items()))


def column(rows, **match):
    """Values of rows matching every ``field=value`` pair, in row order."""
    return np.array([r.value for r in rows if all(getattr(r, k) == v for k, v in match.items())])


__all__ = [
    "CONCORDANCE_TOL", "CSV_COLUMNS", "ConfigError", "GTH_NEGATIVE", "PRESETS", "ResultRow",
    "SweepSpec", "column", "flag_discrepancies", "gate_spec", "parse_config", "preset_figure",
    "rows_to_csv_text", "run_sweep", "spec_to_config", "summarize", "write_csv",
]
