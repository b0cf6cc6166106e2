import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

from .catalog import (
    EXTENDED,
    FamilyId,
    build,
    closed_form_table,
    family_basis,
    quotient_matches_family,
    verify_brace_vanishing_relations,
    verify_bv_pbw,
    verify_order_one,
    verify_tbv_elimination,
)
from .config import Settings, get_settings
from .errors import OperadForgeError
from .givental import (
    enumerate_bamboos,
    verify_bimodule,
    verify_commutator_identity,
    verify_infinitesimal_symmetry,
    verify_psi_independence,
)
from .homotopy import check_homotopy_square_zero, homotopy_quotient_dg, verify_quotient_map_properties
from .koszul import check_square_zero, complex_slice, homology_dims, koszul_homotopy_check, pairing_check, ql_dual_dg
from .monomials import NS, OPERAD, TWISTED
from .presentation import Presentation
from .reports import DimensionTable, Report
from .result_store import ResultStore, Table
from .rewriting import GroebnerBasis, weight_bound_for_window

logger = logging.getLogger(__name__)

# completion of the defining relations adds nothing for these
CERTIFIED = ("tHyperCom", "tGrav", "blmHyperComDual", "Grav", "ncGrav")
DUAL_PAIRS = {
    "tHyperCom": "tGrav",
    "HyperCom": "Grav",
    "ncHyperCom": "ncGrav",
    "blmHyperCom": "blmHyperComDual",
}
# arity reached by each family task in a full run
FULL_ARITY = {
    "tHyperCom": 7,
    "tGrav": 10,
    "HyperCom": 6,
    "Grav": 6,
    "ncHyperCom": 6,
    "ncGrav": 7,
    "blmHyperCom": 6,
    "blmHyperComDual": 8,
    "bHyperComDual": 6,
    "bncHyperComDual": 9,
}


def hilbert_table(basis: GroebnerBasis, max_degree: Optional[int] = None) -> Table:
    """Arity -> degree -> count, cut at max_degree when given"""
    raw = basis.hilbert_table(max_weight=basis.max_weight)
    return {
        arity: {d: c for d, c in sorted(counts.items()) if max_degree is None or d <= max_degree}
        for arity, counts in raw.items()
    }


def dimension_table(
    fid: FamilyId,
    settings: Optional[Settings] = None,
    store: Optional[ResultStore] = None,
    order: Optional[str] = None,
    presentation: Optional[Presentation] = None,
) -> Tuple[DimensionTable, Optional[GroebnerBasis]]:
    """Graded dimensions of a family, from the cache when possible"""
    settings = settings or get_settings()
    fid = fid.validate().resolved(settings)
    presentation = presentation or build(fid, settings)
    order_text = order or presentation.order
    limit = fid.max_degree if fid.degree_truncated else None
    computed: List[GroebnerBasis] = []

    def compute() -> Table:
        basis = family_basis(fid, presentation, order, settings)
        computed.append(basis)
        return hilbert_table(basis, limit)

    if store is None:
        graded = compute()
    else:
        graded = store.hilbert_table(fid.name, fid.k, order_text, fid.max_arity, limit, compute)
    expected = closed_form_table(fid, settings) or None
    table = DimensionTable(label=fid.label, graded=graded, expected=expected)
    return table, (computed[0] if computed else None)


def verify_family(
    fid: FamilyId,
    settings: Optional[Settings] = None,
    store: Optional[ResultStore] = None,
    order: Optional[str] = None,
) -> Report:
    """Dimension table, closed-form comparison, completion certificate and pairing check for one family"""
    settings = settings or get_settings()
    fid = fid.validate().resolved(settings)
    report = Report(
        command="verify",
        arguments={"family": fid.name, "k": fid.k},
        truncation={"max_arity": fid.max_arity, "max_degree": fid.max_degree},
    )
    presentation = build(fid, settings)
    certify = fid.name in CERTIFIED
    table, basis = dimension_table(fid, settings, None if certify else store, order, presentation)
    report.tables.append(table)
    if table.expected:
        totals = table.totals()
        mismatches = {n: {"computed": totals.get(n, 0), "expected": e} for n, e in table.expected.items() if totals.get(n, 0) != e}
        report.add_verdict(
            f"{fid.label}: closed-form dimensions",
            not mismatches,
            "" if not mismatches else f"{len(mismatches)} arities differ",
            {"arities": mismatches} if mismatches else None,
        )
    if certify and basis is not None:
        report.add_verdict(
            f"{fid.label}: relations form a Gröbner basis",
            basis.new_count == 0,
            f"{basis.new_count} new elements after {basis.pairs_checked} S-polynomials",
            {"log": basis.completion_log()} if basis.new_count else None,
        )
    if fid.name in DUAL_PAIRS:
        dual = build(FamilyId(DUAL_PAIRS[fid.name], fid.k, fid.max_arity, fid.max_degree), settings)
        outcome = pairing_check(presentation, dual, fid.max_arity)
        report.add_verdict(
            f"{fid.label}: pairing with {DUAL_PAIRS[fid.name]}",
            outcome["annihilates"] and outcome["dims_match"],
            f"convention {outcome['convention']}",
            None if outcome["annihilates"] and outcome["dims_match"] else {"by_arity": outcome["by_arity"]},
        )
    return report


# ---------------------------------------------------------------- dg checks


def dg_homology_table(p: Presentation, arity: int, low: int, high: int) -> Dict[int, int]:
    bound = weight_bound_for_window(p.free, arity, low - 1, high + 1)
    basis = p.basis(max(arity, 1), max_weight=bound + 1)
    piece = complex_slice(p, basis, arity, low, high)
    return {d: h for d, h in homology_dims(piece).items() if h}


def verify_dual_dg_homology(k: int, max_arity: int, settings: Optional[Settings] = None) -> Report:
    """Homology of the dg dual of blmBV_k against the graded table of blmHyperCom_k^!"""
    report = Report(command="homology", arguments={"family": "blmBV-qlin", "k": k}, truncation={"max_arity": max_arity})
    qlin = build(FamilyId("blmBV-qlin", k=k, max_arity=max_arity), settings)
    dual = ql_dual_dg(qlin, max_arity)
    table, _ = dimension_table(FamilyId("blmHyperComDual", k=k, max_arity=max_arity), settings)
    for arity in range(1, max_arity + 1):
        expected = {d: c for d, c in table.graded.get(arity, {}).items() if c}
        if not expected:
            continue
        low, high = min(expected), max(expected)
        found = dg_homology_table(dual, arity, low, high)
        report.add_verdict(
            f"blmBV({k})^! homology in arity {arity}",
            found == expected,
            witness=None if found == expected else {"homology": found, "expected": expected},
        )
    # arity 0 is spanned by the powers of the dual of D, one class per even degree
    depth = 2 * max_arity
    found = dg_homology_table(dual, 0, -depth, 0)
    expected = {-d: 1 for d in range(0, depth + 1, 2)}
    report.add_verdict(
        f"blmBV({k})^! homology in arity 0",
        found == expected,
        witness=None if found == expected else {"homology": found, "expected": expected},
    )
    return report


def verify_square_zero(name: str, k: int, max_arity: int, max_degree: int, settings: Optional[Settings] = None) -> bool:
    qlin = build(FamilyId(name, k=k, max_arity=max_arity), settings)
    dual = ql_dual_dg(qlin, max_arity)
    start = 0 if dual.kind == TWISTED else 1
    for arity in range(start, max_arity + 1):
        bound = weight_bound_for_window(dual.free, arity, -max_degree - 1, max_degree + 1)
        basis = dual.basis(max(max_arity, 1), max_weight=bound + 1)
        check_square_zero(complex_slice(dual, basis, arity, -max_degree, max_degree))
    return True


# ---------------------------------------------------------------- battery


@dataclass
class Task:
    name: str
    run: Callable[[], object]


def _as_report(name: str, outcome: object) -> Report:
    if isinstance(outcome, Report):
        return outcome
    report = Report(command=name)
    if isinstance(outcome, dict) and "ok" in outcome:
        report.add_verdict(name, outcome["ok"], witness=None if outcome["ok"] else outcome)
    elif isinstance(outcome, dict):
        failing = {str(key): value for key, value in outcome.items() if not value}
        report.add_verdict(name, not failing, witness=failing or None)
    else:
        report.add_verdict(name, bool(outcome))
    return report


def _bamboo_degree_law(max_n: int = 6, max_k: int = 4, max_p: int = 4) -> bool:
    for k in range(2, max_k + 1):
        for n in range(1, max_n + 1):
            for p in range(max_p + 1):
                if bool(enumerate_bamboos(n, k, p)) != (n == 1 + p * (k - 1)):
                    logger.warning(f"Bamboo degree law fails at n={n}, k={k}, p={p}")
                    return False
    return True


def family_arity(name: str, settings: Settings, quick: bool = False) -> int:
    """Arity a family task of the battery runs at; raising the configured bound raises it"""
    if quick:
        return 4
    return max(FULL_ARITY[name], settings.max_arity_for(FamilyId(name).kind))


def default_tasks(settings: Settings, store: Optional[ResultStore] = None, quick: bool = False) -> List[Task]:
    small = 3 if quick else 4
    checks = 3 if quick else 6
    pbw = 3 if quick else 5
    tasks: List[Task] = []

    def family(name: str, k: Optional[int] = None):
        fid = FamilyId(name, k=k, max_arity=family_arity(name, settings, quick))
        tasks.append(Task(f"verify {fid.label}", lambda: verify_family(fid, settings, store)))

    for name in ("tHyperCom", "tGrav", "HyperCom", "Grav", "ncHyperCom", "ncGrav"):
        family(name)
    for k in (2, 3, 4):
        family("blmHyperComDual", k)
    for k in (2, 3):
        family("blmHyperCom", k)
        family("bHyperComDual", k)
        family("bncHyperComDual", k)

    for kind in (TWISTED, OPERAD, NS):
        tasks.append(Task(f"order one {kind}", lambda kind=kind: verify_order_one(kind, checks)))
        tasks.append(Task(f"brace relations {kind}", lambda kind=kind: verify_brace_vanishing_relations(kind, small)))
    tasks.append(Task("tBV elimination", lambda: verify_tbv_elimination(3)))
    tasks.append(Task("Koszul complex homotopy", lambda: koszul_homotopy_check(small)))
    for name, k in (("blmHyperCom", 2), ("blmHyperCom", 3), ("bHyperCom", 2), ("bncHyperCom", 2)):
        fid = FamilyId(name, k=k, max_arity=checks)
        tasks.append(Task(f"quotient of {fid.label}", lambda fid=fid: quotient_matches_family(fid, settings)))
    tasks.append(Task("PBW basis twisted", lambda: verify_bv_pbw(TWISTED, pbw, settings)))
    tasks.append(Task("PBW basis ns", lambda: verify_bv_pbw(NS, pbw, settings)))

    for family_name in EXTENDED:
        for n in range(2, small + 1):
            tasks.append(Task(f"psi independence {family_name} n={n}", lambda f=family_name, n=n: verify_psi_independence(f, n)))
            tasks.append(Task(f"psi bimodule {family_name} n={n}", lambda f=family_name, n=n: verify_bimodule(f, n)))
        for p in (0, 1, 2):
            tasks.append(
                Task(
                    f"Givental symmetry {family_name} p={p}",
                    lambda f=family_name, p=p: verify_infinitesimal_symmetry(f, small - 1, p),
                )
            )
    tasks.append(Task("Givental commutator tHC", lambda: verify_commutator_identity("tHC", 3, 1, 0)))
    tasks.append(Task("bamboo degree law", _bamboo_degree_law))

    for k in (2, 3):
        tasks.append(Task(f"dual dg homology blmBV({k})", lambda k=k: verify_dual_dg_homology(k, small, settings)))
        for name in ("blmBV-qlin", "bBV-qlin", "bncBV-qlin"):
            tasks.append(Task(f"d^2 = 0 on {name}({k})^!", lambda n=name, k=k: verify_square_zero(n, k, small - 1, 4, settings)))
        for kind in (TWISTED, OPERAD, NS):
            tasks.append(
                Task(
                    f"homotopy quotient {kind} k={k}",
                    lambda k=k, kind=kind: check_homotopy_square_zero(
                        homotopy_quotient_dg(kind, k, 2, small - 1), small - 1, 4
                    ),
                )
            )
            tasks.append(
                Task(f"quotient map {kind} k={k}", lambda k=k, kind=kind: verify_quotient_map_properties(k, kind, small))
            )
    return tasks


def _run_task(task: Task) -> Report:
    logger.info(f"Running {task.name}")
    try:
        return _as_report(task.name, task.run())
    except OperadForgeError as e:
        report = Report(command=task.name)
        report.add_verdict(task.name, False, str(e), getattr(e, "slice_info", None))
        return report
    except Exception as e:
        report = Report(command=task.name)
        report.add_verdict(task.name, False, f"Error running {task.name}: {str(e)}")
        return report


def verify_all(
    settings: Optional[Settings] = None,
    store: Optional[ResultStore] = None,
    quick: bool = False,
    tasks: Optional[List[Task]] = None,
) -> Report:
    """Run the verification battery on a thread pool capped by max_threads"""
    settings = settings or get_settings()
    tasks = tasks if tasks is not None else default_tasks(settings, store, quick)
    report = Report(
        command="verify-all",
        arguments={"quick": quick},
        truncation={
            "max_arity_twisted": settings.max_arity_twisted,
            "max_arity_operad": settings.max_arity_operad,
            "max_arity_ns": settings.max_arity_ns,
            "max_degree": settings.max_degree,
        },
    )
    with ThreadPoolExecutor(max_workers=settings.max_threads) as pool:
        # reports are merged in task order
        for outcome in pool.map(_run_task, tasks):
            report.merge(outcome)
    logger.info(f"Battery finished: {sum(v.ok for v in report.verdicts)}/{len(report.verdicts)} checks passed")
    return report


async def verify_all_async(
    settings: Optional[Settings] = None,
    store: Optional[ResultStore] = None,
    quick: bool = False,
    tasks: Optional[List[Task]] = None,
) -> Report:
    return await asyncio.to_thread(verify_all, settings, store, quick, tasks)
