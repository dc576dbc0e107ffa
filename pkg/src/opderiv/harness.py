"""Check orchestration: configs, the check registry, and run reports.

Every check name maps one-to-one onto an operation of the calculus /
representation / reflexivity modules; the harness only generates the
scenario operands, invokes the operation, and collects the reports.
Identical config and seed reproduce identical numerical report fields
(timings excluded) on one platform.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .core import DEFAULT_TOL, TolerancePolicy, operator_norm
from .derivation import (
    binomial_derivative,
    band_derivation,
    band_embed,
    central_difference_derivative,
    central_difference_scalar,
    commutator_derivative,
    default_step,
    derivative_chain,
    iterated_derivative,
    leibniz_check,
    lipschitz_check,
    automorphism,
    uniform_convergence_check,
)
from .reflexivity import (
    ReflexivityViolation,
    VonNeumannAlgebraSpec,
    invariance_residuals,
    invariant_family,
    reflexivity_check,
)
from .reports import CheckReport
from .scenarios import (
    ConfigError,
    circle_scenario,
    custom_scenario,
    random_operator,
    random_scenario,
    random_symbol_coeffs,
    toeplitz_from_symbol,
)
from .triangular import (
    ad_expansion_check,
    conjugation_identity_check,
    homomorphism_check,
    norm_sandwich_check,
)

__all__ = [
    "CHECK_NAMES",
    "REPORT_SCHEMA",
    "ScenarioConfig",
    "ScenarioData",
    "build_scenario",
    "run_checks",
    "RunReport",
]

REPORT_SCHEMA = "opderiv-report/1"

CHECK_NAMES = (
    "leibniz",
    "binomial_eq",
    "band_eq",
    "fd_first",
    "fd_higher",
    "lipschitz",
    "uniform_conv",
    "phi_hom",
    "phi_conj",
    "norm_sandwich",
    "ad_identity",
    "invariance",
    "reflexivity",
)


@dataclass
class ScenarioConfig:
    """Validated run configuration (scenario, algebra, order, checks)."""

    scenario: dict
    algebra: dict
    n: int = 1
    seed: int = 0
    checks: tuple = CHECK_NAMES
    tol: TolerancePolicy = DEFAULT_TOL

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        scenario = raw.get("scenario")
        if not isinstance(scenario, dict) or "kind" not in scenario:
            raise ConfigError("config.scenario must be an object with a 'kind'")
        if scenario["kind"] not in ("circle_fourier", "random", "custom"):
            raise ConfigError(f"unknown scenario kind {scenario['kind']!r}")
        if scenario["kind"] in ("circle_fourier", "random"):
            if int(scenario.get("N", 0)) < 1:
                raise ConfigError("scenario.N must be >= 1")
        algebra = raw.get("algebra", {"kind": "full"})
        if isinstance(algebra, str):
            algebra = {"kind": algebra}
        if algebra.get("kind") not in ("full", "diagonal_masa", "block_diagonal", "generated"):
            raise ConfigError(f"unknown algebra kind {algebra.get('kind')!r}")
        n = int(raw.get("n", 1))
        if n < 0:
            raise ConfigError("n must be >= 0")
        seed = int(raw.get("seed", 0))
        checks = raw.get("checks", ["all"])
        if isinstance(checks, str):
            checks = [checks]
        if checks == ["all"]:
            checks = list(CHECK_NAMES)
        if not checks:
            raise ConfigError("checks list must not be empty")
        unknown = [c for c in checks if c not in CHECK_NAMES]
        if unknown:
            raise ConfigError(f"unknown checks: {unknown}; valid names: {list(CHECK_NAMES)}")
        tol_overrides = raw.get("tolerances", {})
        if not isinstance(tol_overrides, dict):
            raise ConfigError("tolerances must be an object")
        try:
            tol = DEFAULT_TOL.replace(**{k: float(v) for k, v in tol_overrides.items()})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad tolerance overrides: {exc}") from exc
        return cls(scenario=dict(scenario), algebra=dict(algebra), n=n, seed=seed,
                   checks=tuple(checks), tol=tol)

    @classmethod
    def from_file(cls, path) -> "ScenarioConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "algebra": self.algebra,
            "n": self.n,
            "seed": self.seed,
            "checks": list(self.checks),
            "tolerances": {
                "tol_herm": self.tol.tol_herm,
                "tol_eig": self.tol.tol_eig,
                "tol_alg": self.tol.tol_alg,
                "tol_fd": self.tol.tol_fd,
                "rank_cutoff": self.tol.rank_cutoff,
            },
        }


@dataclass
class ScenarioData:
    """Concrete operands one config run works on."""

    label: str
    generator: object
    x: np.ndarray
    y: np.ndarray
    algebra: VonNeumannAlgebraSpec
    n: int
    seed: int


def _algebra_spec(algebra: dict, dim: int) -> VonNeumannAlgebraSpec:
    kind = algebra["kind"]
    if kind == "block_diagonal":
        pattern = algebra.get("pattern")
        if not pattern:
            raise ConfigError("block_diagonal algebra requires a 'pattern' list")
        if sum(int(k) for k in pattern) != dim:
            raise ConfigError(f"block pattern {pattern} does not sum to the dimension {dim}")
        return VonNeumannAlgebraSpec("block_diagonal", dim, pattern=tuple(int(k) for k in pattern))
    if kind == "generated":
        paths = algebra.get("paths")
        if not paths:
            raise ConfigError("generated algebra requires generator file 'paths'")
        from .core import load_operator

        try:
            gens = tuple(load_operator(p) for p in paths)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"could not load algebra generators: {exc}") from exc
        return VonNeumannAlgebraSpec("generated", dim, generators=gens)
    return VonNeumannAlgebraSpec(kind, dim)


def build_scenario(config: ScenarioConfig) -> ScenarioData:
    """Generate (D, x) per the config plus a companion operator y."""
    kind = config.scenario["kind"]
    if kind == "circle_fourier":
        n_modes = int(config.scenario["N"])
        x_kind = config.scenario.get("x_kind", {"kind": "shift", "k": 1})
        gen, x = circle_scenario(n_modes, x_kind)
        degree = min(2, 2 * n_modes)
        y = toeplitz_from_symbol(
            n_modes, random_symbol_coeffs(config.seed + 1, degree)
        )
        label = f"circle_fourier(N={n_modes},{x_kind.get('kind', '?')})"
    elif kind == "random":
        dim = int(config.scenario["N"])
        x_kind = config.scenario.get("x_kind", "general")
        gen, x = random_scenario(dim, config.seed, x_kind, tol=config.tol)
        y = random_operator(dim, np.random.default_rng(config.seed + 1000003), "general")
        label = f"random(N={dim},seed={config.seed},{x_kind})"
    elif kind == "custom":
        gen, x = custom_scenario(
            config.scenario["d_path"], config.scenario["x_path"], tol=config.tol
        )
        y = random_operator(gen.dim, np.random.default_rng(config.seed + 1000003), "general")
        label = f"custom({config.scenario['d_path']})"
    else:  # pragma: no cover - validated in from_dict
        raise ConfigError(f"unknown scenario kind {kind!r}")
    algebra = _algebra_spec(config.algebra, gen.dim)
    return ScenarioData(label, gen, x, y, algebra, config.n, config.seed)


def _unit_vectors(dim: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    vecs = []
    for _ in range(2):
        v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        vecs.append(v / np.linalg.norm(v))
    return vecs[0], vecs[1]


def _check_leibniz(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    return leibniz_check(data.generator, data.x, data.y, tol, instance_id=data.label)


def _check_binomial_eq(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    d, x = data.generator, data.x
    x_norm, d_norm = operator_norm(x), d.norm()
    residuals, tolerance, passed = [], 0.0, True
    for k in range(1, 6):
        resid = operator_norm(binomial_derivative(d, x, k) - iterated_derivative(d, x, k))
        bound = tol.alg(d_norm**k, x_norm)
        residuals.append(resid)
        tolerance = max(tolerance, bound)
        passed = passed and resid <= bound
    return CheckReport("binomial_eq", data.label, residuals, tolerance, passed)


def _check_band_eq(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    d, x = data.generator, data.x
    bm = band_embed(d, x)
    embed_resid = operator_norm(bm.assemble() - x)
    x_norm, d_norm = operator_norm(x), d.norm()
    residuals, tolerance = [embed_resid], tol.alg(x_norm)
    passed = embed_resid <= tol.alg(x_norm)
    for k in range(1, 6):
        resid = operator_norm(band_derivation(bm, k).assemble() - iterated_derivative(d, x, k))
        bound = tol.alg(d_norm**k, x_norm)
        residuals.append(resid)
        tolerance = max(tolerance, bound)
        passed = passed and resid <= bound
    return CheckReport(
        "band_eq", data.label, residuals, tolerance, passed, details={"bands": list(bm.bands)}
    )


def _check_fd_first(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    d, x = data.generator, data.x
    exact = commutator_derivative(d, x)
    h = default_step(d)
    err_h = operator_norm(central_difference_derivative(d, x, h) - exact)
    h_big = 50.0 * h
    err_big = operator_norm(central_difference_derivative(d, x, h_big) - exact)
    err_half = operator_norm(central_difference_derivative(d, x, h_big / 2) - exact)
    order = np.log2(err_big / err_half) if err_half > 0 else np.inf
    passed = err_h <= tol.tol_fd and order >= 1.9
    return CheckReport(
        "fd_first",
        data.label,
        [err_h],
        tol.tol_fd,
        bool(passed),
        details={"order": float(order), "h": h},
    )


def _check_fd_higher(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    d, x = data.generator, data.x
    xi, eta = _unit_vectors(d.dim, data.seed + 11)
    t0 = 0.3
    h = default_step(d)
    residuals, orders, passed = [], [], True
    for m in range(1, min(3, max(1, data.n)) + 1):
        exact = complex(np.vdot(eta, automorphism(d, iterated_derivative(d, x, m), t0) @ xi))
        err = abs(central_difference_scalar(d, x, m, xi, eta, t0, h) - exact)
        h_big = 50.0 * h
        e1 = abs(central_difference_scalar(d, x, m, xi, eta, t0, h_big) - exact)
        e2 = abs(central_difference_scalar(d, x, m, xi, eta, t0, h_big / 2) - exact)
        order = float(np.log2(e1 / e2)) if e2 > 0 else np.inf
        residuals.append(err)
        orders.append(order)
        passed = passed and err <= tol.tol_fd and order >= 1.9
    return CheckReport(
        "fd_higher", data.label, residuals, tol.tol_fd, passed, details={"orders": orders}
    )


def _check_lipschitz(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    rng = np.random.default_rng(data.seed + 17)
    ts = np.concatenate(
        [[0.1, 1.0, 10.0], rng.uniform(-10, 10, size=47)]
    )
    return lipschitz_check(data.generator, data.x, ts, tol, instance_id=data.label)


def _check_uniform_conv(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    return uniform_convergence_check(data.generator, data.x, tol=tol, instance_id=data.label)


def _check_phi_hom(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    cx = derivative_chain(data.generator, data.x, data.n)
    cy = derivative_chain(data.generator, data.y, data.n)
    return homomorphism_check(cx, cy, tol, instance_id=data.label)


def _check_phi_conj(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    chain = derivative_chain(data.generator, data.x, data.n)
    return conjugation_identity_check(data.generator, chain, tol, instance_id=data.label)


def _check_norm_sandwich(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    chain = derivative_chain(data.generator, data.x, data.n)
    return norm_sandwich_check(chain, tol, instance_id=data.label)


def _check_ad_identity(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    return ad_expansion_check(data.x, data.y, max(1, data.n), tol, instance_id=data.label)


def _check_invariance(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    family = invariant_family(data.algebra, data.generator, data.n, tol=tol, seed=data.seed)
    residuals_by_label = invariance_residuals(
        family, data.generator, data.algebra.generating_set(), tol
    )
    fwd_norm = 1.0 + data.generator.norm()
    tolerance = tol.alg(fwd_norm ** data.n)
    residuals = list(residuals_by_label.values())
    passed = all(r <= tolerance for r in residuals)
    return CheckReport(
        "invariance",
        data.label,
        residuals,
        tolerance,
        passed,
        details={"members": list(residuals_by_label)},
    )


def _check_reflexivity(data: ScenarioData, tol: TolerancePolicy) -> CheckReport:
    try:
        report = reflexivity_check(
            data.algebra, data.generator, data.n, tol=tol, seed=data.seed
        )
    except ReflexivityViolation as exc:
        report = exc.report
    resid = max(report.max_reconstruction_residual, report.max_membership_residual)
    return CheckReport(
        "reflexivity",
        data.label,
        [resid],
        tol.alg(),
        report.passed,
        details=report.to_json(),
    )


_CHECK_FUNS = {
    "leibniz": _check_leibniz,
    "binomial_eq": _check_binomial_eq,
    "band_eq": _check_band_eq,
    "fd_first": _check_fd_first,
    "fd_higher": _check_fd_higher,
    "lipschitz": _check_lipschitz,
    "uniform_conv": _check_uniform_conv,
    "phi_hom": _check_phi_hom,
    "phi_conj": _check_phi_conj,
    "norm_sandwich": _check_norm_sandwich,
    "ad_identity": _check_ad_identity,
    "invariance": _check_invariance,
    "reflexivity": _check_reflexivity,
}


@dataclass
class RunReport:
    """Aggregated results of one config run."""

    config: dict
    results: list
    timings: dict
    overall_pass: bool
    schema: str = REPORT_SCHEMA
    version: str = __version__

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "version": self.version,
            "config": self.config,
            "results": [r.to_json() for r in self.results],
            "timings": {k: float(v) for k, v in self.timings.items()},
            "overall_pass": bool(self.overall_pass),
        }

    def table(self) -> str:
        """Fixed-width summary table, one row per check."""
        header = f"{'check':<14} {'scenario':<34} {'residual':>12} {'tolerance':>12}  result"
        lines = [header, "-" * len(header)]
        for r in self.results:
            worst = max(r.residuals, default=0.0)
            verdict = "PASS" if r.passed else "FAIL"
            lines.append(
                f"{r.check:<14} {r.instance_id[:34]:<34} {worst:>12.3e} {r.tolerance:>12.3e}  {verdict}"
            )
        lines.append(
            f"overall: {'PASS' if self.overall_pass else 'FAIL'} "
            f"({sum(r.passed for r in self.results)}/{len(self.results)} checks)"
        )
        return "\n".join(lines)


def run_checks(config: ScenarioConfig) -> RunReport:
    """Execute the selected checks on the configured scenario.

    Results are keyed by check name and emitted in canonical order, so the
    report layout is independent of execution order.
    """
    data = build_scenario(config)
    cells = {}
    timings = {}
    for name in config.checks:
        t0 = time.perf_counter()
        cells[name] = _CHECK_FUNS[name](data, config.tol)
        timings[name] = time.perf_counter() - t0
    ordered = [cells[name] for name in CHECK_NAMES if name in cells]
    overall = all(r.passed for r in ordered)
    return RunReport(
        config=config.to_dict(), results=ordered, timings=timings, overall_pass=overall
    )
