"""
场景运行器 - 生成可复现的数据集与检查汇总

每个场景由任务列表、逐任务求值函数和汇总检查组成。
每个随机样本的随机数流只由 (seed, 样本序号) 决定，与并行进程数无关。
"""

import csv
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import measures, sode, states
from .data_models import (
    CORE_COLUMNS,
    DATASET_VERSION,
    ChannelKind,
    FamilyTag,
    OutputFormat,
    QuantumState,
    SampleRecord,
    ScenarioConfig,
    StateFamily,
)
from .errors import (
    InfeasibleParametersError,
    InvalidArgumentError,
    OutputError,
    UnknownScenarioError,
)

logger = logging.getLogger(__name__)

Task = Tuple[int, Dict[str, Any]]

BOUND_TOL = 1e-9
XI_TOL = 1e-10
FD_TOL = 1e-5
FD_MIN_NEGATIVITY = 1e-5
THETA_BAND = 1e-8
PHASE_FLAT = 1e-4
PHASE_VISIBLE = 0.01
ENVELOPE_TOL = 0.02
ENVELOPE_BINS = 10


def sample_rng(seed: int, index: int) -> np.random.Generator:
    """第 index 个样本的独立随机数流"""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def _ghz_k(k: int, alpha_sq: float) -> QuantumState:
    return states.build(StateFamily(FamilyTag.G_TYPE_K, {
        "k": k, "alpha": math.sqrt(alpha_sq), "beta": math.sqrt(1.0 - alpha_sq),
    }))


def _open_grid(points: int, hi: float = 1.0) -> np.ndarray:
    """(0, hi) 内不含端点的等距网格"""
    return np.linspace(0.0, hi, points + 2)[1:-1]


def _max(values: Sequence[Optional[float]]) -> float:
    present = [abs(v) for v in values if v is not None and not math.isnan(v)]
    return max(present) if present else 0.0


# ---------------------------------------------------------------------------
# 通用记录
# ---------------------------------------------------------------------------

def two_qubit_record(index: int, state: QuantumState, config: ScenarioConfig,
                     params: Optional[Dict[str, Any]] = None) -> SampleRecord:
    """两比特态的全部核心列"""
    report = sode.sode_perturbative(state, config.qubit, config.channel)
    n = measures.negativity(state, config.qubit)
    c = measures.concurrence2(state)
    lower, upper = sode.eta_bounds2(min(n, 1.0))
    extra = dict(params or {})
    extra.setdefault("eta_lower", lower)
    extra.setdefault("eta_upper", upper)
    return SampleRecord(
        index=index,
        state=state,
        negativity=n,
        concurrence=c,
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        linear_entropy=measures.linear_entropy(state),
        mutual_information=measures.mutual_information(state, [0]),
        xi1=c - n,
        chi1=2 * n + 1 - report.eta,
        xi2=n - measures.negativity_min_for_concurrence(min(c, 1.0)),
        chi2=report.eta - lower,
        params=extra,
    )


def three_qubit_record(index: int, state: QuantumState, config: ScenarioConfig,
                       params: Optional[Dict[str, Any]] = None) -> Tuple[SampleRecord, Any]:
    """三比特纯态：求解器结果、不变量与一般公式"""
    report = sode.sode_perturbative(state, config.qubit, config.channel)
    inv = measures.invariants3(state)
    record = SampleRecord(
        index=index,
        state=state,
        negativity=report.negativity,
        concurrence=measures.pure_bipartite_concurrence(state, [config.qubit]),
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        params=dict(params or {}),
    )
    record.params.update({
        "tau": inv.tau, "I1": inv.I1, "I2": inv.I2, "I3": inv.I3,
        "I4": inv.I4, "Theta": inv.Theta, "M": inv.M,
    })
    return record, inv


def _bound_violations(records: List[SampleRecord]) -> int:
    count = 0
    for r in records:
        lower, upper = r.params.get("eta_lower"), r.params.get("eta_upper")
        if r.eta is None:
            continue
        if lower is not None and r.eta < lower - BOUND_TOL:
            count += 1
        elif upper is not None and r.eta > upper + BOUND_TOL:
            count += 1
    return count


def _xi_chi_violations(records: List[SampleRecord]) -> Dict[str, int]:
    return {
        "xi1_negative": sum(1 for r in records if r.xi1 is not None and r.xi1 < -XI_TOL),
        "chi1_negative": sum(1 for r in records if r.chi1 is not None and r.chi1 < -BOUND_TOL),
    }


# ---------------------------------------------------------------------------
# 两比特场景
# ---------------------------------------------------------------------------

def _random_tasks(config: ScenarioConfig) -> List[Task]:
    return [(i, {}) for i in range(config.samples)]


def _append_family(tasks: List[Task], family: str, key: str, values: Sequence[float]) -> None:
    offset = len(tasks)
    for j, value in enumerate(values):
        tasks.append((offset + j, {"family": family, "key": key, "value": float(value)}))


def _eval_random_or_family(task: Task, config: ScenarioConfig) -> SampleRecord:
    """空载荷为随机混态，否则按载荷构造命名态族"""
    index, payload = task
    if not payload:
        state = states.random_mixed2(sample_rng(config.seed, index))
        return two_qubit_record(index, state, config, {"family": "random", "family_param": None})
    state = states.build(states.family(payload["family"], **{payload["key"]: payload["value"]}))
    return two_qubit_record(index, state, config,
                            {"family": payload["family"], "family_param": payload["value"]})


def _scatter2_tasks(config: ScenarioConfig) -> List[Task]:
    # 随机样本之后追加两条前沿：ρ_m 在下界上，纯态在上界上
    tasks = _random_tasks(config)
    _append_family(tasks, "RhoM", "gamma", np.linspace(0.0, 1.0, config.grid_points)[1:])
    _append_family(tasks, "PureTheta", "theta", np.linspace(0.0, math.pi / 4, config.grid_points)[1:])
    return tasks


def _bound_checks(records: List[SampleRecord]) -> Dict[str, Any]:
    result: Dict[str, Any] = {"bound_violations": _bound_violations(records)}
    result.update(_xi_chi_violations(records))
    return result


def envelope_gaps(records: List[SampleRecord], bins: int = ENVELOPE_BINS) -> List[Dict[str, Any]]:
    """按 𝒩 分箱：每箱内 min(η − 下界) 与 min(上界 − η)"""
    table: List[Dict[str, Any]] = [
        {"n_low": j / bins, "n_high": (j + 1) / bins, "rows": 0, "gap_lower": None, "gap_upper": None}
        for j in range(bins)
    ]
    for r in records:
        if r.negativity is None or r.eta is None or r.negativity <= BOUND_TOL:
            continue
        cell = table[min(int(r.negativity * bins), bins - 1)]
        lower = r.eta - r.params["eta_lower"]
        upper = r.params["eta_upper"] - r.eta
        cell["rows"] += 1
        cell["gap_lower"] = lower if cell["gap_lower"] is None else min(cell["gap_lower"], lower)
        cell["gap_upper"] = upper if cell["gap_upper"] is None else min(cell["gap_upper"], upper)
    return table


def _check_scatter2(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _bound_checks(records)
    envelope = envelope_gaps(records)
    misses = sum(
        1 for cell in envelope
        if cell["rows"] == 0 or cell["gap_lower"] > ENVELOPE_TOL or cell["gap_upper"] > ENVELOPE_TOL
    )
    random_rows = [r for r in records if r.params.get("family") == "random"]
    random_envelope = envelope_gaps(random_rows)
    result["envelope"] = envelope
    result["envelope_contact_misses"] = misses
    result["random_max_gap_lower"] = _max([c["gap_lower"] for c in random_envelope])
    result["random_max_gap_upper"] = _max([c["gap_upper"] for c in random_envelope])
    result["violations"] = (
        result["bound_violations"] + result["xi1_negative"] + result["chi1_negative"] + misses
    )
    return result


def _check_weighted2(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _bound_checks(records)
    gaps_lower = [r.eta - r.params["eta_lower"] for r in records if r.negativity > 0]
    result["min_gap_lower"] = min(gaps_lower) if gaps_lower else None
    result["violations"] = result["bound_violations"] + result["xi1_negative"] + result["chi1_negative"]
    return result


def _eval_weighted2(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, _ = task
    rng = sample_rng(config.seed, index)
    weight, gamma = rng.uniform(), rng.uniform()
    random_state = states.random_mixed2(rng)
    frontier = states.build(StateFamily(FamilyTag.RHO_M, {"gamma": gamma}))
    mixed = states.mix([(weight, random_state), (1.0 - weight, frontier)])
    return two_qubit_record(index, mixed, config, {"weight": weight, "gamma": gamma})


def _xi_chi_tasks(config: ScenarioConfig) -> List[Task]:
    tasks = _random_tasks(config)
    gammas = np.linspace(0.0, 1.0, config.grid_points)[1:]
    _append_family(tasks, "RhoM", "gamma", gammas)
    _append_family(tasks, "RhoK", "gamma", gammas)
    return tasks


def _check_xi_chi(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result: Dict[str, Any] = dict(_xi_chi_violations(records))
    result["xi2_negative"] = sum(1 for r in records if r.xi2 < -BOUND_TOL)
    result["chi2_negative"] = sum(1 for r in records if r.chi2 < -BOUND_TOL)
    # χ₁ = 0 ⇒ ξ₁ = 0
    result["chi1_zero_xi1_positive"] = sum(
        1 for r in records if abs(r.chi1) <= BOUND_TOL and r.xi1 > 1e-6
    )
    result["violations"] = sum(result.values())
    return result


def _twoparam_tasks(config: ScenarioConfig) -> List[Task]:
    variant = config.variant or "C"
    g = config.grid_points
    tasks: List[Task] = []
    if variant == "C":
        for gamma in np.linspace(0.0, 1.0, g)[1:]:
            for a in np.linspace(0.0, 1.0 - gamma, g):
                b = max(0.0, 1.0 - gamma - a)
                tasks.append((len(tasks), {"gamma": float(gamma), "a": float(a), "b": float(b)}))
    elif variant == "SL":
        for gamma in np.linspace(0.0, 1.0, g)[1:]:
            for theta in np.linspace(0.0, math.pi / 4, g)[1:]:
                tasks.append((len(tasks), {"gamma": float(gamma), "theta": float(theta)}))
    elif variant == "Itot":
        for n in _open_grid(g):
            a_max = 1.0 - states.itot_curve(n)
            for a in np.linspace(0.0, a_max, g):
                tasks.append((len(tasks), {"n_target": float(n), "a_free": float(a)}))
    else:
        raise InvalidArgumentError(f"twoparam 的变体必须是 C|SL|Itot variant={variant}")
    return tasks


def _eval_twoparam(task: Task, config: ScenarioConfig) -> Optional[SampleRecord]:
    index, p = task
    variant = config.variant or "C"
    if variant == "C":
        state = states.build(StateFamily(FamilyTag.RHO_C, p))
        record = two_qubit_record(index, state, config, dict(p))
        formula = None
        if record.negativity > 1e-9:
            formula = sode.eta_rho_c(min(record.negativity, 1.0), min(record.concurrence, 1.0))
        record.params["eta_formula"] = formula
        record.params["deviation"] = None if formula is None else record.eta - formula
        return record
    if variant == "SL":
        state = states.build(StateFamily(FamilyTag.RHO_SL, p))
        ansatz = states.ansatz_matrix(*states.rho_sl_ansatz_params(p["gamma"], p["theta"]))
        return two_qubit_record(index, state, config, {
            **p, "ansatz_deviation": float(np.max(np.abs(ansatz - state.rho))),
        })
    try:
        state = states.make_rho_itot(p["n_target"], p["a_free"])
    except InfeasibleParametersError as exc:
        logger.debug("跳过不可行网格点 %s: %s", p, exc.message)
        return None
    record = two_qubit_record(index, state, config, dict(p))
    curve = states.itot_curve(record.negativity)
    record.params["itot_curve"] = curve
    record.params["curve_deviation"] = record.concurrence - curve
    return record


def _check_twoparam(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    variant = config.variant or "C"
    result: Dict[str, Any] = {"bound_violations": _bound_violations(records)}
    if variant == "C":
        result["max_formula_deviation"] = _max([r.params["deviation"] for r in records])
        result["formula_violations"] = sum(
            1 for r in records if r.params["deviation"] is not None and abs(r.params["deviation"]) > 1e-9
        )
    elif variant == "SL":
        result["max_ansatz_deviation"] = _max([r.params["ansatz_deviation"] for r in records])
        result["formula_violations"] = sum(1 for r in records if r.params["ansatz_deviation"] > 1e-12)
    else:
        result["max_curve_deviation"] = _max([r.params["curve_deviation"] for r in records])
        result["formula_violations"] = sum(
            1 for r in records if abs(r.params["curve_deviation"]) > 1e-8
        )
    result["violations"] = result["bound_violations"] + result["formula_violations"]
    return result


def _pure2_tasks(config: ScenarioConfig) -> List[Task]:
    thetas = list(np.arange(0.05, math.pi / 4, 0.05)) + [math.pi / 4]
    return [(i, {"theta": float(t)}) for i, t in enumerate(thetas)]


def _eval_pure2(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    state = states.build(StateFamily(FamilyTag.PURE_THETA, p))
    formula = 2 * math.sin(2 * p["theta"]) + 1
    record = two_qubit_record(index, state, config, {"theta": p["theta"], "eta_formula": formula})
    record.params["deviation"] = record.eta - formula
    return record


def _check_formula(records: List[SampleRecord], tol: float) -> Dict[str, Any]:
    deviations = [r.params.get("deviation") for r in records]
    return {
        "max_deviation": _max(deviations),
        "formula_violations": sum(1 for d in deviations if d is not None and abs(d) > tol),
    }


def _check_pure2(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _check_formula(records, 1e-9)
    result["violations"] = result["formula_violations"]
    return result


def _frontier2_tasks(config: ScenarioConfig) -> List[Task]:
    tasks: List[Task] = []
    for gamma in np.linspace(0.0, 1.0, config.grid_points)[1:]:
        tasks.append((len(tasks), {"family": "RhoM", "gamma": float(gamma)}))
    for theta in np.linspace(0.0, math.pi / 4, config.grid_points)[1:]:
        tasks.append((len(tasks), {"family": "PureTheta", "theta": float(theta)}))
    return tasks


def _eval_frontier2(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    name = p["family"]
    value = p["gamma"] if name == "RhoM" else p["theta"]
    key = "gamma" if name == "RhoM" else "theta"
    state = states.build(states.family(name, **{key: value}))
    record = two_qubit_record(index, state, config, {"family": name, "family_param": value})
    target = record.params["eta_lower"] if name == "RhoM" else record.params["eta_upper"]
    record.params["deviation"] = record.eta - target
    return record


def _check_frontier2(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _check_formula(records, 1e-9)
    result["violations"] = result["formula_violations"]
    return result


# ---------------------------------------------------------------------------
# 三比特场景
# ---------------------------------------------------------------------------

def _eval_scatter3(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, _ = task
    rng = sample_rng(config.seed, index)
    if (config.variant or "sym") == "sym":
        state = states.random_symmetric3(rng)
        record, inv = three_qubit_record(index, state, config)
        formula = sode.eta_sym3(inv.N1, inv.tau, inv.I4) if inv.N1 > 0 else None
        lower, upper = sode.eta_g3(min(inv.N1, 1.0)), sode.eta_j3(min(inv.N1, 1.0))
    else:
        state = states.random_pure(3, rng)
        record, inv = three_qubit_record(index, state, config)
        formula = sode.eta_gen3(inv) if inv.N1 > 0 else None
        n = min(inv.N1, 1.0)
        lower, upper = min(sode.eta_g3(n), sode.eta_pure2(n)), sode.eta_j3(n)
    record.params.update({
        "eta_formula": formula,
        "deviation": None if formula is None else record.eta - formula,
        "eta_lower": lower,
        "eta_upper": upper,
    })
    return record


def _check_scatter3(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    tol = 1e-7 if (config.variant or "sym") == "sym" else FD_TOL
    result = _check_formula(
        [r for r in records if r.negativity is not None and r.negativity >= FD_MIN_NEGATIVITY], tol
    )
    # 前沿界只作统计，不计入 violations
    result["bound_violations"] = _bound_violations(records)
    result["violations"] = result["formula_violations"]
    return result


def _eval_validate3(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, _ = task
    state = states.random_pure(3, sample_rng(config.seed, index))
    record, inv = three_qubit_record(index, state, config)
    eta_fd = sode.sode_finite_difference(state, config.qubit, config.channel, config.dt)
    formula = sode.eta_gen3(inv) if inv.N1 > 0 else None
    record.params.update({
        "tangle_imbalance": sode.tangle_imbalance(inv),
        "eta_formula": formula,
        "eta_fd": eta_fd,
        "deviation_fd": None if formula is None else formula - eta_fd,
        "deviation_solver": None if formula is None else formula - record.eta,
    })
    return record


def _check_validate3(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    usable = [r for r in records if r.negativity >= FD_MIN_NEGATIVITY]
    max_fd = _max([r.params["deviation_fd"] for r in usable])
    max_solver = _max([r.params["deviation_solver"] for r in usable])
    criterion_mismatch = 0
    sign_mismatch = 0
    for r in records:
        theta = r.params["Theta"]
        if abs(theta) <= THETA_BAND:
            continue
        if (r.eta_zero > THETA_BAND) != (theta > THETA_BAND):
            criterion_mismatch += 1
        if np.sign(theta) != np.sign(r.params["tangle_imbalance"]):
            sign_mismatch += 1
    fd_violations = sum(1 for r in usable if abs(r.params["deviation_fd"]) >= FD_TOL)
    return {
        "rows_with_n1_above_threshold": len(usable),
        "max_deviation_fd": max_fd,
        "max_deviation_solver": max_solver,
        "fd_violations": fd_violations,
        "theta_criterion_mismatch": criterion_mismatch,
        "theta_sign_mismatch": sign_mismatch,
        "violations": fd_violations + criterion_mismatch + sign_mismatch,
    }


def _lu_tasks(config: ScenarioConfig) -> List[Task]:
    return _random_tasks(config)


def _lu_snapshot(state: QuantumState, config: ScenarioConfig) -> Dict[str, Any]:
    report = sode.sode_perturbative(state, config.qubit, config.channel)
    inv = measures.invariants3(state)
    return {
        "eta": report.eta,
        "negativity": measures.negativity(state, config.qubit),
        "concurrence": measures.pure_bipartite_concurrence(state, [config.qubit]),
        "invariants": np.array([inv.I1, inv.I2, inv.I3, inv.I4, inv.I5, inv.tau]),
    }


def _eval_lu_check(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, _ = task
    rng = sample_rng(config.seed, index)
    state = states.random_pure(3, rng)
    base = _lu_snapshot(state, config)
    worst = {"eta": 0.0, "negativity": 0.0, "concurrence": 0.0, "invariants": 0.0}
    for _ in range(config.lu_per_state):
        moved = _lu_snapshot(states.transform(state, states.random_local_unitary(3, rng)), config)
        for key in ("eta", "negativity", "concurrence"):
            worst[key] = max(worst[key], abs(moved[key] - base[key]))
        worst["invariants"] = max(worst["invariants"],
                                  float(np.max(np.abs(moved["invariants"] - base["invariants"]))))
    return SampleRecord(
        index=index,
        state=state,
        negativity=base["negativity"],
        concurrence=base["concurrence"],
        eta=base["eta"],
        params={
            "transforms": config.lu_per_state,
            "max_dev_eta": worst["eta"],
            "max_dev_negativity": worst["negativity"],
            "max_dev_concurrence": worst["concurrence"],
            "max_dev_invariants": worst["invariants"],
        },
    )


def _check_lu(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    keys = ("max_dev_eta", "max_dev_negativity", "max_dev_concurrence", "max_dev_invariants")
    result: Dict[str, Any] = {key: _max([r.params[key] for r in records]) for key in keys}
    result["violations"] = sum(
        1 for r in records if any(r.params[key] > 1e-8 for key in keys)
    )
    return result


# ---------------------------------------------------------------------------
# 多比特场景
# ---------------------------------------------------------------------------

def _wseries_tasks(config: ScenarioConfig) -> List[Task]:
    return [(i, {"k": k}) for i, k in enumerate(config.k_values)]


def _eval_wseries(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    k = p["k"]
    state = states.build(StateFamily(FamilyTag.W_K, {"k": k}))
    report = sode.sode_perturbative(state, config.qubit, config.channel)
    formula = sode.eta_w_k(k)
    return SampleRecord(
        index=index,
        state=state,
        negativity=report.negativity,
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        params={
            "k": k,
            "eta_formula": formula,
            "deviation": report.eta - formula,
            "t_star": report.t_star,
            "robustness": report.robustness,
        },
    )


def _check_wseries(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _check_formula(records, 1e-9)
    ordered = sorted(records, key=lambda r: r.params["k"])
    peak = max(ordered, key=lambda r: r.params["eta_formula"]) if ordered else None
    result["peak_k"] = None if peak is None else peak.params["k"]
    robust = [r.params["robustness"] for r in ordered]
    result["robustness_decreasing"] = all(a > b for a, b in zip(robust, robust[1:]))
    result["violations"] = result["formula_violations"]
    return result


def _ghz_grid_tasks(config: ScenarioConfig) -> List[Task]:
    tasks: List[Task] = []
    for k in config.k_values:
        for alpha_sq in np.linspace(0.0, 0.5, config.grid_points):
            tasks.append((len(tasks), {"k": int(k), "alpha_sq": float(alpha_sq)}))
    return tasks


def _eval_ghzseries(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    k = p["k"]
    state = _ghz_k(k, p["alpha_sq"])
    report = sode.sode_perturbative(state, config.qubit, ChannelKind.DEPOLARIZING)
    n_formula = 2 * math.sqrt(p["alpha_sq"] * (1 - p["alpha_sq"]))
    formula = sode.eta_ghz_k(k, n_formula) if report.negativity > 0 else 0.0
    return SampleRecord(
        index=index,
        state=state,
        negativity=report.negativity,
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        params={
            "k": k,
            "alpha_sq": p["alpha_sq"],
            "eta_formula": formula,
            "deviation": report.eta - formula,
            "robustness": report.robustness,
        },
    )


def _check_ghz(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _check_formula(records, 1e-8)
    result["violations"] = result["formula_violations"]
    return result


def _eval_dephasing(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    k = p["k"]
    state = _ghz_k(k, p["alpha_sq"])
    report = sode.sode_perturbative(state, config.qubit, ChannelKind.DEPHASING)
    formula = sode.eta_dephasing_ghz_k(k, min(report.negativity, 1.0))
    eta_fd = sode.sode_finite_difference(state, config.qubit, ChannelKind.DEPHASING, config.dt)
    return SampleRecord(
        index=index,
        state=state,
        negativity=report.negativity,
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        params={
            "k": k,
            "alpha_sq": p["alpha_sq"],
            "eta_formula": formula,
            "deviation": report.eta - formula,
            "eta_fd": eta_fd,
            "deviation_fd": report.eta - eta_fd,
        },
    )


def _check_dephasing(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    result = _check_formula(records, 1e-8)
    usable = [r for r in records if r.negativity >= FD_MIN_NEGATIVITY]
    result["max_deviation_fd"] = _max([r.params["deviation_fd"] for r in usable])
    result["fd_violations"] = sum(1 for r in usable if abs(r.params["deviation_fd"]) >= FD_TOL)
    result["violations"] = result["formula_violations"] + result["fd_violations"]
    return result


def _zphase_tasks(config: ScenarioConfig) -> List[Task]:
    if not config.q_step > 0:
        raise InvalidArgumentError(f"q_step 必须为正 q_step={config.q_step}")
    steps = int(round(1.0 / config.q_step))
    qs = np.linspace(0.0, 1.0, steps + 1)
    tasks: List[Task] = []
    for k in config.k_values:
        for q in qs:
            tasks.append((len(tasks), {"k": int(k), "q": float(q)}))
    return tasks


def _eval_zphase(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    k, q = p["k"], p["q"]
    etas = sode.z_state_etas(k, q, sode.phi_grid(config.phi_points), config.qubit, config.channel)
    state = states.build(StateFamily(FamilyTag.Z_STATE, {"k": k, "q": q, "phi": 0.0}))
    return SampleRecord(
        index=index,
        state=state,
        negativity=measures.negativity(state, config.qubit),
        eta=float(etas[0]),
        params={
            "k": k,
            "q": q,
            "n_formula": measures.z_state_negativity(k, q),
            "eta_min": float(np.min(etas)),
            "eta_max": float(np.max(etas)),
            "delta_eta": float(np.max(etas) - np.min(etas)),
        },
    )


def _check_zphase(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    per_k: Dict[str, float] = {}
    for r in records:
        key = str(r.params["k"])
        per_k[key] = max(per_k.get(key, 0.0), r.params["delta_eta"])
    flat = sum(1 for k, v in per_k.items() if int(k) >= 5 and v > PHASE_FLAT)
    n_dev = _max([r.negativity - r.params["n_formula"] for r in records])
    result: Dict[str, Any] = {
        "max_delta_eta_by_k": per_k,
        "max_negativity_deviation": n_dev,
        "large_k_phase_violations": flat,
    }
    violations = flat + (1 if n_dev > 1e-9 else 0)
    # k = 3 时相位的影响必须可见
    if "3" in per_k:
        result["k3_phase_sensitive"] = per_k["3"] > PHASE_VISIBLE
        violations += 0 if result["k3_phase_sensitive"] else 1
    result["violations"] = violations
    return result


def _robustness_tasks(config: ScenarioConfig) -> List[Task]:
    return [(i, {"k": int(k)}) for i, k in enumerate(config.k_values)]


def _eval_robustness(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    k = p["k"]
    eta_ghz = sode.eta_ghz_k(k, 1.0)
    _, r_ghz = sode.robustness(1.0, eta_ghz)
    n_w = measures.w_k_negativity(k)
    eta_w = sode.eta_w_k(k)
    _, r_w = sode.robustness(n_w, eta_w)
    return SampleRecord(
        index=index,
        params={
            "k": k,
            "eta_ghz": eta_ghz,
            "r_ghz": r_ghz,
            "k_r_ghz": k * r_ghz,
            "n_w": n_w,
            "eta_w": eta_w,
            "r_w": r_w,
            "sqrtk_r_w": math.sqrt(k) * r_w,
            "ghz_w_gap": sode.ghz_w_gap(k),
        },
    )


def _check_robustness(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    if not records:
        return {"violations": 0}
    last = max(records, key=lambda r: r.params["k"])
    k_r, sqrt_r = last.params["k_r_ghz"], last.params["sqrtk_r_w"]
    result: Dict[str, Any] = {"largest_k": last.params["k"], "k_r_ghz": k_r, "sqrtk_r_w": sqrt_r}
    result["violations"] = 0
    if last.params["k"] >= 10000:
        result["violations"] = int(not 0.98 <= k_r <= 1.0) + int(not 0.95 <= sqrt_r <= 1.0)
    return result


SINGULARITY_PROBE_B = (1e-2, 1e-3, 1e-4)


def _concurrence_tasks(config: ScenarioConfig) -> List[Task]:
    tasks = _random_tasks(config)
    for b in SINGULARITY_PROBE_B:
        tasks.append((len(tasks), {"b": b}))
    return tasks


def _eval_concurrence(task: Task, config: ScenarioConfig) -> SampleRecord:
    index, p = task
    if not p:
        state = states.random_pure(2, sample_rng(config.seed, index))
        family_name, b = "pure", None
    else:
        b = p["b"]
        state = states.build(StateFamily(FamilyTag.ANSATZ, {
            "x": 0.1, "y": 0.1, "a": 0.2, "b": b, "gamma": 0.6 - b,
        }))
        family_name = "ansatz"
    eta_c = sode.eta_concurrence(state, config.channel, config.dt)
    report = sode.sode_perturbative(state, 0, config.channel)
    c = measures.concurrence2(state)
    _, r_c = sode.robustness(c, eta_c)
    return SampleRecord(
        index=index,
        state=state,
        negativity=report.negativity,
        concurrence=c,
        eta=report.eta,
        eta_minus=report.eta_minus,
        eta_zero=report.eta_zero,
        params={"family": family_name, "b": b, "eta_c": eta_c, "eta_n": report.eta, "robustness_c": r_c},
    )


def _check_concurrence(records: List[SampleRecord], config: ScenarioConfig) -> Dict[str, Any]:
    pure = [r for r in records if r.params["family"] == "pure" and r.negativity >= FD_MIN_NEGATIVITY]
    near_singular = sorted((r for r in records if r.params["family"] == "ansatz"), key=lambda r: -r.params["b"])
    above = sum(1 for r in pure if r.params["eta_c"] > r.params["eta_n"] + FD_TOL)
    unequal = sum(1 for r in pure if abs(r.params["eta_c"] - r.params["eta_n"]) >= FD_TOL)
    speeds = [r.params["eta_c"] for r in near_singular]
    increasing = all(a < b for a, b in zip(speeds, speeds[1:]))
    return {
        "eta_c_above_eta_n": above,
        "pure_inequality": unequal,
        "singularity_speeds": speeds,
        "singularity_increasing": increasing,
        "violations": above + unequal + (0 if increasing else 1),
    }


# ---------------------------------------------------------------------------
# 场景注册表
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """场景定义"""
    name: str
    description: str
    make_tasks: Callable[[ScenarioConfig], List[Task]]
    evaluate: Callable[[Task, ScenarioConfig], Optional[SampleRecord]]
    check: Callable[[List[SampleRecord], ScenarioConfig], Dict[str, Any]]
    columns: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    variants: Tuple[str, ...] = ()
    random: bool = False

    def param_columns(self, variant: Optional[str]) -> Tuple[str, ...]:
        key = variant or (self.variants[0] if self.variants else "")
        return self.columns.get(key, self.columns.get("", ()))


_BOUNDS = ("eta_lower", "eta_upper")
_THREE = ("tau", "I1", "I2", "I3", "I4", "Theta", "M")

SCENARIOS: Dict[str, Scenario] = {
    s.name: s for s in (
        Scenario("scatter2", "随机两比特混态的 η–𝒩 散点、上下界与前沿接触",
                 _scatter2_tasks, _eval_random_or_family, _check_scatter2,
                 {"": ("family", "family_param") + _BOUNDS}, random=True),
        Scenario("weighted2", "随机态与 ρ_m 的随机加权混合",
                 _random_tasks, _eval_weighted2, _check_weighted2,
                 {"": ("weight", "gamma") + _BOUNDS}, random=True),
        Scenario("xi-chi", "ξ₁–χ₁ 与 ξ₂–χ₂ 平面（附 ρ_m、ρ_k 前沿曲线）",
                 _xi_chi_tasks, _eval_random_or_family, _check_xi_chi,
                 {"": ("family", "family_param") + _BOUNDS}, random=True),
        Scenario("twoparam", "双参数态族 ρ_C / ρ_SL / ρ_Itot",
                 _twoparam_tasks, _eval_twoparam, _check_twoparam,
                 {
                     "C": ("gamma", "a", "b", "eta_formula", "deviation") + _BOUNDS,
                     "SL": ("gamma", "theta", "ansatz_deviation") + _BOUNDS,
                     "Itot": ("n_target", "a_free", "itot_curve", "curve_deviation") + _BOUNDS,
                 },
                 variants=("C", "SL", "Itot")),
        Scenario("pure2", "两比特纯态 η = 2𝒩 + 1",
                 _pure2_tasks, _eval_pure2, _check_pure2,
                 {"": ("theta", "eta_formula", "deviation") + _BOUNDS}),
        Scenario("frontier2", "前沿态 ρ_m（下界）与纯态（上界）",
                 _frontier2_tasks, _eval_frontier2, _check_frontier2,
                 {"": ("family", "family_param", "deviation") + _BOUNDS}),
        Scenario("scatter3", "三比特对称/任意纯态散点与解析式",
                 _random_tasks, _eval_scatter3, _check_scatter3,
                 {
                     "sym": _THREE + ("eta_formula", "deviation") + _BOUNDS,
                     "gen": _THREE + ("eta_formula", "deviation") + _BOUNDS,
                 },
                 variants=("sym", "gen"), random=True),
        Scenario("validate3", "一般三比特公式与有限差分对照、Θ 判据",
                 _random_tasks, _eval_validate3, _check_validate3,
                 {"": _THREE + ("tangle_imbalance", "eta_formula", "eta_fd",
                                "deviation_fd", "deviation_solver")}, random=True),
        Scenario("wseries", "W_k 态的 SoDE 随 k 的变化",
                 _wseries_tasks, _eval_wseries, _check_wseries,
                 {"": ("k", "eta_formula", "deviation", "t_star", "robustness")}),
        Scenario("ghzseries", "GHZ 型态 η = k𝒩 + ½",
                 _ghz_grid_tasks, _eval_ghzseries, _check_ghz,
                 {"": ("k", "alpha_sq", "eta_formula", "deviation", "robustness")}),
        Scenario("zphase", "相位 φ 对 |Z(q,φ)⟩_k 的 SoDE 的影响 Δη(q)",
                 _zphase_tasks, _eval_zphase, _check_zphase,
                 {"": ("k", "q", "n_formula", "eta_min", "eta_max", "delta_eta")}),
        Scenario("robustness-scaling", "大 k 极限下 GHZ 与 W 的鲁棒性",
                 _robustness_tasks, _eval_robustness, _check_robustness,
                 {"": ("k", "eta_ghz", "r_ghz", "k_r_ghz", "n_w", "eta_w", "r_w",
                       "sqrtk_r_w", "ghz_w_gap")}),
        Scenario("concurrence-speed", "并发度速度 η^C 与拟设态 b→0 奇异性",
                 _concurrence_tasks, _eval_concurrence, _check_concurrence,
                 {"": ("family", "b", "eta_c", "eta_n", "robustness_c")}, random=True),
        Scenario("dephasing-check", "退相位信道下 GHZ 型态 η = k𝒩",
                 _ghz_grid_tasks, _eval_dephasing, _check_dephasing,
                 {"": ("k", "alpha_sq", "eta_formula", "deviation", "eta_fd", "deviation_fd")}),
        Scenario("lu-check", "随机局域幺正变换下的不变性",
                 _lu_tasks, _eval_lu_check, _check_lu,
                 {"": ("transforms", "max_dev_eta", "max_dev_negativity",
                       "max_dev_concurrence", "max_dev_invariants")}, random=True),
    )
}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(f"未知场景 scenario={name}（可选: {', '.join(SCENARIOS)}）")


# ---------------------------------------------------------------------------
# 运行与输出
# ---------------------------------------------------------------------------

@dataclass
class ScenarioResult:
    """一次场景运行的结果"""
    records: List[SampleRecord]
    summary: Dict[str, Any]
    param_columns: Tuple[str, ...]
    path: Optional[str] = None
    summary_path: Optional[str] = None
    states_path: Optional[str] = None


def _run_task(config: ScenarioConfig, task: Task) -> Optional[SampleRecord]:
    record = get_scenario(config.scenario).evaluate(task, config)
    if record is not None and not config.dump_states:
        record.state = None
    return record


def _check_config(scenario: Scenario, config: ScenarioConfig) -> None:
    if config.samples < 1:
        raise InvalidArgumentError(f"samples 必须 ≥ 1 samples={config.samples}")
    if config.seed < 0:
        raise InvalidArgumentError(f"seed 必须是非负整数 seed={config.seed}")
    if config.workers < 1:
        raise InvalidArgumentError(f"workers 必须 ≥ 1 workers={config.workers}")
    if scenario.variants and config.variant not in (None,) + scenario.variants:
        raise InvalidArgumentError(
            f"{scenario.name} 的变体必须是 {'|'.join(scenario.variants)} variant={config.variant}"
        )
    if not scenario.variants and config.variant is not None:
        raise InvalidArgumentError(f"{scenario.name} 没有变体 variant={config.variant}")
    if config.grid_points < 2 or config.phi_points < 1 or not config.k_values:
        raise InvalidArgumentError("网格参数无效：grid_points ≥ 2、phi_points ≥ 1、k 列表非空")
    if not config.dt > 0:
        raise InvalidArgumentError(f"dt 必须为正 dt={config.dt}")


def _numeric_ranges(records: List[SampleRecord]) -> Dict[str, List[float]]:
    ranges: Dict[str, List[float]] = {}
    for name in CORE_COLUMNS[1:]:
        values = [getattr(r, name) for r in records if getattr(r, name) is not None]
        if values:
            ranges[name] = [float(min(values)), float(max(values))]
    return ranges


def run_scenario(config: ScenarioConfig) -> ScenarioResult:
    """运行场景，按样本序号排序，写出数据集与汇总"""
    scenario = get_scenario(config.scenario)
    _check_config(scenario, config)
    tasks = scenario.make_tasks(config)
    if not tasks:
        raise InfeasibleParametersError(f"场景 {scenario.name} 的网格为空")
    logger.info("运行场景 %s：%d 个任务，%d 个进程", scenario.name, len(tasks), config.workers)

    worker = partial(_run_task, config)
    if config.workers > 1:
        chunk = max(1, len(tasks) // (config.workers * 8))
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(worker, tasks, chunksize=chunk))
    else:
        results = [worker(task) for task in tasks]

    records = sorted((r for r in results if r is not None), key=lambda r: r.index)
    skipped = len(tasks) - len(records)
    if not records:
        raise InfeasibleParametersError(f"场景 {scenario.name} 的所有网格点都不可行")
    if skipped:
        logger.warning("⚠️ 跳过了 %d 个不可行的网格点", skipped)

    checks = scenario.check(records, config)
    summary: Dict[str, Any] = {
        "scenario": scenario.name,
        "variant": config.variant or (scenario.variants[0] if scenario.variants else None),
        "dataset_version": DATASET_VERSION,
        "seed": config.seed,
        "samples": config.samples if scenario.random else None,
        "channel": config.channel.value,
        "qubit": config.qubit,
        "rows": len(records),
        "skipped": skipped,
        "ranges": _numeric_ranges(records),
        "checks": checks,
        "violations": int(checks.get("violations", 0)),
    }
    columns = scenario.param_columns(config.variant)
    result = ScenarioResult(records=records, summary=summary, param_columns=columns)
    if config.out:
        result.path = emit_dataset(records, config.fmt, config.out, columns, scenario.name)
        result.summary_path = write_summary(summary, config.out)
    if config.dump_states:
        result.states_path = write_state_dump(records, config.dump_states)
    return result


def _format_number(value: Any) -> Any:
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return value


def _json_number(value: Any) -> Any:
    text = _format_number(value)
    if isinstance(value, (float, np.floating)):
        return float(text)
    if isinstance(value, dict):
        return {k: _json_number(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_number(v) for v in value]
    return text


def emit_dataset(records: Sequence[SampleRecord], fmt: OutputFormat, path: str,
                 param_columns: Tuple[str, ...] = (), scenario: str = "") -> str:
    """写出数据集：CSV 首行为版本注释，其后为固定顺序的表头"""
    if not records:
        raise InvalidArgumentError("records 不能为空")
    fmt = OutputFormat(fmt)
    header = list(CORE_COLUMNS) + [c for c in param_columns if c not in CORE_COLUMNS]
    rows = [r.as_row(tuple(param_columns)) for r in records]
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as f:
            if fmt is OutputFormat.CSV:
                f.write(f"# sodelab-dataset v{DATASET_VERSION} scenario={scenario} "
                        f"columns={len(header)}\n")
                writer = csv.writer(f, lineterminator="\n")
                writer.writerow(header)
                for row in rows:
                    writer.writerow(["" if row[c] is None else _format_number(row[c]) for c in header])
            else:
                payload = [{c: _json_number(row[c]) for c in header} for row in rows]
                json.dump(payload, f, ensure_ascii=False, indent=1)
                f.write("\n")
    except OSError as exc:
        raise OutputError(f"无法写入数据集 path={path}: {exc}")
    logger.info("数据集已写入 %s（%d 行）", path, len(rows))
    return path


def write_summary(summary: Dict[str, Any], dataset_path: str) -> str:
    path = f"{dataset_path}.summary.json"
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(_json_number(summary), f, ensure_ascii=False, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as exc:
        raise OutputError(f"无法写入汇总 path={path}: {exc}")
    return path


def read_dataset(path: str) -> List[Dict[str, Any]]:
    """读回数据集（CSV 跳过注释行，数值列转为 float）"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            if path.endswith(".json"):
                return json.load(f)
            lines = [line for line in f if not line.startswith("#")]
    except OSError as exc:
        raise OutputError(f"无法读取数据集 path={path}: {exc}")
    rows = []
    for raw in csv.DictReader(lines):
        row: Dict[str, Any] = {}
        for key, value in raw.items():
            if value == "":
                row[key] = None
                continue
            try:
                row[key] = float(value)
            except ValueError:
                row[key] = value
        rows.append(row)
    return rows


def write_state_dump(records: Sequence[SampleRecord], path: str) -> str:
    """每行一个 {index, k, rho} 文档，可用 read_state_dump 复现每个样本的密度矩阵"""
    dumped = 0
    try:
        directory = os.path.dirname(os.path.abspath(path))
        os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                if record.state is None:
                    continue
                doc = {"index": record.index}
                doc.update(states.state_to_json(record.state))
                f.write(json.dumps(doc, ensure_ascii=False))
                f.write("\n")
                dumped += 1
    except OSError as exc:
        raise OutputError(f"无法写入态导出文件 path={path}: {exc}")
    if dumped < len(records):
        logger.warning("⚠️ %d 行没有对应的单个态，未导出", len(records) - dumped)
    logger.info("态已导出到 %s（%d 个）", path, dumped)
    return path


def read_state_dump(path: str) -> Dict[int, QuantumState]:
    """读回 write_state_dump 的输出：样本序号 → 态"""
    result: Dict[int, QuantumState] = {}
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    doc = json.loads(line)
                    result[int(doc["index"])] = states.state_from_json(doc)
    except OSError as exc:
        raise OutputError(f"无法读取态导出文件 path={path}: {exc}")
    except (json.JSONDecodeError, KeyError) as exc:
        raise InvalidArgumentError(f"态导出文件格式错误 path={path}: {exc}")
    return result
