"""Parameter sweeps, figure-ready tables and the Monte Carlo validation harness.

Tables are plain lists of SweepRow; writers emit CSV (comma separated,
floats at 17 significant digits so 64-bit values round-trip exactly) or
JSON (same rows as objects plus a metadata block). Outputs carry the
fully resolved configuration in their header and contain nothing
time-dependent, so identical inputs give byte-identical files.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import __version__
from .attacks import (
    active_attack,
    active_eve_info,
    active_plan,
    bs_attack,
    optimal_mu_e,
    optimal_source_intensity,
)
from .core import ProtocolParams, attenuate, channel_point
from .montecarlo import (
    DistortionReport,
    decoy_distortion,
    derive_stream_seed,
    simulate_active_attack,
    simulate_no_attack,
)

__all__ = [
    "SweepSpec",
    "SweepRow",
    "CheckResult",
    "ValidationReport",
    "length_grid",
    "sweep_qber_curves",
    "sweep_optimal_intensity",
    "run_montecarlo_validation",
    "write_sweep",
    "read_sweep_csv",
    "read_sweep_json",
]

_ATTACK_NAMES = ("bs", "active")
_FORMATS = ("csv", "json")

_COLUMNS = (
    "mu",
    "length_km",
    "qber_bs",
    "qber_active",
    "i_ae_active",
    "mu_e_opt",
    "block_fraction",
    "fully_insecure",
    "margin",
    "mu_opt",
)


@dataclass(frozen=True)
class SweepSpec:
    """Resolved configuration of a critical-QBER sweep."""

    mu_list: Tuple[float, ...]
    delta: float = 0.2
    decoy_fraction: float = 0.1
    l_min: float = 0.0
    l_max: float = 150.0
    l_step: float = 1.0
    attacks: Tuple[str, ...] = ("bs", "active")
    output_path: Optional[str] = None
    format: str = "csv"

    def __post_init__(self) -> None:
        if not self.mu_list:
            raise ValueError("mu_list must not be empty")
        if any(mu <= 0 for mu in self.mu_list):
            raise ValueError(f"all intensities must be positive, got {self.mu_list}")
        if not self.delta > 0:
            raise ValueError(f"attenuation coefficient must be positive, got {self.delta}")
        if not 0.0 <= self.decoy_fraction < 1.0:
            raise ValueError(f"decoy fraction must lie in [0, 1), got {self.decoy_fraction}")
        if self.l_min < 0:
            raise ValueError(f"l_min must be non-negative, got {self.l_min}")
        if not self.l_step > 0:
            raise ValueError(f"l_step must be positive, got {self.l_step}")
        if self.l_max < self.l_min:
            raise ValueError(f"l_max {self.l_max} below l_min {self.l_min}")
        if not self.attacks or any(a not in _ATTACK_NAMES for a in self.attacks):
            raise ValueError(f"attacks must be a non-empty subset of {_ATTACK_NAMES}")
        if self.format not in _FORMATS:
            raise ValueError(f"format must be one of {_FORMATS}, got {self.format}")


@dataclass(frozen=True)
class SweepRow:
    """One (source intensity, length) point of a sweep table.

    Columns not produced by the requested computation are NaN (mu_opt is
    only set by the optimal-intensity sweep, qber_* only for the attacks
    actually requested).
    """

    mu: float
    length_km: float
    qber_bs: float = math.nan
    qber_active: float = math.nan
    i_ae_active: float = math.nan
    mu_e_opt: float = math.nan
    block_fraction: float = math.nan
    fully_insecure: bool = False
    margin: float = math.nan
    mu_opt: float = math.nan


def length_grid(l_min: float, l_max: float, l_step: float) -> List[float]:
    """Inclusive arithmetic length grid; 0:150:1 yields 151 points."""
    n = int(math.floor((l_max - l_min) / l_step + 1e-9))
    return [l_min + k * l_step for k in range(n + 1)]


def _qber_row(mu: float, delta: float, f: float, length_km: float, attacks: Sequence[str]) -> SweepRow:
    params = ProtocolParams(mu=mu, decoy_fraction=f, delta=delta)
    kwargs: Dict[str, object] = {}
    if "bs" in attacks:
        kwargs["qber_bs"] = bs_attack(params, length_km).qber_critical
    if "active" in attacks:
        report = active_attack(params, length_km)
        mu_b = attenuate(mu, delta, length_km)
        kwargs.update(
            qber_active=report.qber_critical,
            i_ae_active=report.i_ae,
            mu_e_opt=report.plan.mu_e,
            block_fraction=report.plan.block_fraction,
            fully_insecure=report.fully_insecure,
            margin=-math.expm1(-mu_b) * (1.0 - report.i_ae),
        )
    return SweepRow(mu=mu, length_km=length_km, **kwargs)


def _run_points(fn, points: Sequence[tuple], workers: int) -> List[SweepRow]:
    if workers <= 1:
        return [fn(*p) for p in points]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda p: fn(*p), points))


def sweep_qber_curves(spec: SweepSpec, workers: int = 1) -> List[SweepRow]:
    """Critical-QBER curves over a length grid, one row per (mu, length).

    Rows come back sorted by (mu, length). When spec.output_path is set
    the table is also written in spec.format.
    """
    lengths = length_grid(spec.l_min, spec.l_max, spec.l_step)
    points = [
        (mu, spec.delta, spec.decoy_fraction, l, spec.attacks)
        for mu in spec.mu_list
        for l in lengths
    ]
    rows = _run_points(_qber_row, points, workers)
    rows.sort(key=lambda r: (r.mu, r.length_km))
    if spec.output_path is not None:
        write_sweep(spec.output_path, rows, _spec_config(spec, "qber-curves"), spec.format)
    return rows


def _optimal_row(delta: float, f: float, length_km: float) -> SweepRow:
    opt = optimal_source_intensity(delta, f, length_km)
    params = ProtocolParams(mu=opt.mu, decoy_fraction=f, delta=delta)
    report = active_attack(params, length_km)
    return SweepRow(
        mu=opt.mu,
        length_km=length_km,
        qber_bs=bs_attack(params, length_km).qber_critical,
        qber_active=report.qber_critical,
        i_ae_active=report.i_ae,
        mu_e_opt=report.plan.mu_e,
        block_fraction=report.plan.block_fraction,
        fully_insecure=report.fully_insecure,
        margin=opt.margin,
        mu_opt=opt.mu,
    )


def sweep_optimal_intensity(
    delta: float,
    f: float,
    l_min: float,
    l_max: float,
    l_step: float,
    output_path: Optional[str] = None,
    fmt: str = "csv",
    workers: int = 1,
) -> List[SweepRow]:
    """Per length: the margin-optimal source intensity and both critical QBERs there."""
    if l_min < 0 or l_step <= 0 or l_max < l_min:
        raise ValueError(f"invalid length range {l_min}:{l_max}:{l_step}")
    if fmt not in _FORMATS:
        raise ValueError(f"format must be one of {_FORMATS}, got {fmt}")
    points = [(delta, f, l) for l in length_grid(l_min, l_max, l_step)]
    rows = _run_points(_optimal_row, points, workers)
    rows.sort(key=lambda r: r.length_km)
    if output_path is not None:
        config = {
            "command": "optimal-intensity",
            "delta": _fmt_float(delta),
            "decoy_fraction": _fmt_float(f),
            "length": f"{_fmt_float(l_min)}:{_fmt_float(l_max)}:{_fmt_float(l_step)}",
            "format": fmt,
        }
        write_sweep(output_path, rows, config, fmt)
    return rows


# ---------------------------------------------------------------------------
# serialisation

def _fmt_float(x: float) -> str:
    return f"{x:.17g}"


def _fmt_value(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt_float(v)
    return str(v)


def _spec_config(spec: SweepSpec, command: str) -> Dict[str, str]:
    return {
        "command": command,
        "mu": ",".join(_fmt_float(m) for m in spec.mu_list),
        "delta": _fmt_float(spec.delta),
        "decoy_fraction": _fmt_float(spec.decoy_fraction),
        "length": f"{_fmt_float(spec.l_min)}:{_fmt_float(spec.l_max)}:{_fmt_float(spec.l_step)}",
        "attacks": ",".join(spec.attacks),
        "format": spec.format,
    }


def _metadata(config: Dict[str, str]) -> Dict[str, str]:
    return {"tool": "cowsec", "version": __version__, **config}


def write_sweep(path: str, rows: Sequence[SweepRow], config: Dict[str, str], fmt: str = "csv") -> None:
    """Write a sweep table with its resolved configuration in the header."""
    meta = _metadata(config)
    try:
        with open(path, "w", newline="") as fh:
            if fmt == "csv":
                for key, value in meta.items():
                    fh.write(f"# {key}={value}\n")
                writer = csv.writer(fh)
                writer.writerow(_COLUMNS)
                for row in rows:
                    d = asdict(row)
                    writer.writerow([_fmt_value(d[c]) for c in _COLUMNS])
            else:
                payload = {"metadata": meta, "rows": [asdict(r) for r in rows]}
                json.dump(payload, fh, indent=2)
                fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write sweep table to {path}: {exc}") from exc


def _row_from_strings(record: Dict[str, str]) -> SweepRow:
    kwargs: Dict[str, object] = {}
    for column in _COLUMNS:
        raw = record[column]
        kwargs[column] = raw == "true" if column == "fully_insecure" else float(raw)
    return SweepRow(**kwargs)  # type: ignore[arg-type]


def read_sweep_csv(path: str) -> Tuple[Dict[str, str], List[SweepRow]]:
    """Read back a CSV sweep table; inverse of write_sweep for fmt='csv'."""
    header: Dict[str, str] = {}
    try:
        with open(path, newline="") as fh:
            data_lines = []
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    header[key.strip()] = value
                else:
                    data_lines.append(line)
    except OSError as exc:
        raise OSError(f"cannot read sweep table from {path}: {exc}") from exc
    rows = [_row_from_strings(rec) for rec in csv.DictReader(data_lines)]
    return header, rows


def read_sweep_json(path: str) -> Tuple[Dict[str, str], List[SweepRow]]:
    """Read back a JSON sweep table; inverse of write_sweep for fmt='json'."""
    try:
        with open(path) as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read sweep table from {path}: {exc}") from exc
    rows = [SweepRow(**record) for record in payload["rows"]]
    return payload["metadata"], rows


# ---------------------------------------------------------------------------
# Monte Carlo validation

# Minimum expected count in both binomial tails for the normal z-score to
# be trusted; below this a check is reported as low-power, not failed.
_MIN_EXPECTED_COUNT = 10.0
_Z_LIMIT = 4.0


@dataclass(frozen=True)
class CheckResult:
    """One empirical-vs-analytic comparison."""

    name: str
    observed: float
    expected: float
    stderr: float
    z: float
    status: str  # "pass" | "fail" | "low_power"


@dataclass(frozen=True)
class ValidationReport:
    """Cross-validation of the simulator against the closed-form rates."""

    config: Dict[str, object]
    plan: Dict[str, float]
    checks: Tuple[CheckResult, ...]
    distortion: DistortionReport
    passed: bool

    def to_jsonable(self) -> Dict[str, object]:
        return {
            "tool": {"name": "cowsec", "version": __version__},
            "config": self.config,
            "plan": self.plan,
            "checks": [asdict(c) for c in self.checks],
            "distortion": {
                "rows": [asdict(r) for r in self.distortion.rows],
                "flagged": [
                    f"{r.pulse_class}/{r.pattern}" for r in self.distortion.flagged_rows()
                ],
            },
            "passed": self.passed,
        }


def _make_check(name: str, count: int, n_eff: int, expected: float) -> CheckResult:
    observed = count / n_eff if n_eff else math.nan
    stderr = math.sqrt(expected * (1.0 - expected) / n_eff) if n_eff else math.nan
    low_power = (
        n_eff == 0
        or n_eff * expected < _MIN_EXPECTED_COUNT
        or n_eff * (1.0 - expected) < _MIN_EXPECTED_COUNT
    )
    z = (observed - expected) / stderr if stderr and stderr > 0 else math.nan
    if low_power:
        status = "low_power"
    else:
        status = "pass" if abs(z) <= _Z_LIMIT else "fail"
    return CheckResult(
        name=name, observed=observed, expected=expected, stderr=stderr, z=z, status=status
    )


def run_montecarlo_validation(
    params: ProtocolParams, length_km: float, n_pulses: int, seed: int
) -> ValidationReport:
    """Simulate the link at Eve's optimal plan and compare every rate to theory.

    Checks Bob's information-state click rate against the loss-budget
    balance, Eve's conclusive rate, the realised blocked fraction and the
    empirical information proxy (share of Bob's sifted bits Eve knows),
    each at the 4-sigma level, plus the unattacked baseline rates. The
    decoy-distortion report is attached. Deterministic for fixed inputs.
    """
    plan = active_plan(params, length_km, optimal_mu_e(params, length_km))
    i_ae = active_eve_info(plan)
    point = channel_point(params, length_km)
    p_bob = -math.expm1(-point.mu_b)

    attacked = simulate_active_attack(params, length_km, plan, n_pulses, seed)
    baseline = simulate_no_attack(params, length_km, n_pulses, derive_stream_seed(seed, 1))
    distortion = decoy_distortion(params, length_km, plan, n_pulses, seed)

    base_info = baseline.info
    att_info = attacked.info
    checks = [
        _make_check("no_attack_info_click_rate", base_info.bob_click, base_info.sent, p_bob),
        _make_check(
            "attack_bob_info_click_rate", att_info.bob_click, att_info.sent, p_bob
        ),
        _make_check(
            "attack_eve_conclusive_info_rate",
            att_info.eve_conclusive,
            att_info.sent,
            plan.p_conc_inf,
        ),
        _make_check(
            "attack_blocked_fraction", attacked.blocked_total, n_pulses, plan.block_fraction
        ),
        _make_check(
            "attack_i_ae_proxy", att_info.eve_conclusive_bob_click, att_info.bob_click, i_ae
        ),
    ]
    if params.decoy_fraction > 0:
        checks.insert(
            1,
            _make_check(
                "no_attack_decoy_double_rate",
                baseline.decoy.bob_double_click,
                baseline.decoy.sent,
                p_bob * p_bob,
            ),
        )

    config: Dict[str, object] = {
        "mu": params.mu,
        "decoy_fraction": params.decoy_fraction,
        "delta": params.delta,
        "length_km": length_km,
        "n_pulses": n_pulses,
        "seed": seed,
    }
    plan_dict: Dict[str, float] = {
        "mu_e": plan.mu_e,
        "mu_b_prime": plan.mu_b_prime,
        "block_fraction": plan.block_fraction,
        "p_conc_inf": plan.p_conc_inf,
        "p_conc_cont": plan.p_conc_cont,
        "p_conc_total": plan.p_conc_total,
        "i_ae": i_ae,
    }
    passed = all(c.status != "fail" for c in checks)
    return ValidationReport(
        config=config, plan=plan_dict, checks=tuple(checks), distortion=distortion, passed=passed
    )
