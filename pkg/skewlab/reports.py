"""
CSV and JSON renderings of the experiment results.

Floats are written with ``repr`` so a file read back gives the same numbers; nothing time dependent is written,
which keeps the output of a scenario and seed byte-identical between runs.
"""
import csv
import io
import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

from returns import pipeline
from returns.result import Result

from skewlab.helpers import atomic_write, format_float
from skewlab.jets import FiberContractionReport
from skewlab.journe import JourneReport
from skewlab.pcf import PcfValue
from skewlab.regularity import ExpansionReport, HolderEstimate, pair_rows
from skewlab.skew import BunchingReport, InequalityCheck
from skewlab.torus import AccessibleCycle, PeriodicOrbit
from skewlab.transfer import ObstructionWitness, TransferSolution, grid_rows

GRID_HEADER = ("i", "j", "x1", "x2", "phi_value", "pcf_error")
JOURNE_HEADER = ("m", "R", "eta", "ratio", "c_decay_exponent")
PAIRS_HEADER = ("pair_dist", "delta", "log_dist", "log_delta")
BUNCHING_HEADER = ("kind", "order", "name", "lhs", "rhs", "holds", "margin")
PERIODIC_HEADER = ("period", "denominator", "n1", "n2", "x1", "x2", "birkhoff_sum")


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(value) for value in row])
    return buffer.getvalue()


def _jsonable(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return repr(value)
    return value


def json_text(payload: Dict[str, Any]) -> str:
    def clean(item: Any) -> Any:
        if isinstance(item, dict):
            return {str(key): clean(value) for key, value in item.items()}
        if isinstance(item, (list, tuple)):
            return [clean(value) for value in item]
        return _jsonable(item)

    return json.dumps(clean(payload), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def write(out: Union[str, Path], name: str, content: str) -> Path:
    return atomic_write(Path(out) / name, content)


def check_payload(check: InequalityCheck) -> Dict[str, Any]:
    return {"name": check.name, "lhs": check.lhs, "rhs": check.rhs, "holds": check.holds, "margin": check.margin}


def pcf_payload(value: PcfValue, description: str) -> Dict[str, Any]:
    return {"path": description, "value": value.value, "error_bound": value.error_bound, "terms_used": value.terms_used}


def _payload_of_witness(witness: ObstructionWitness) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "kind": witness.kind,
        "value": witness.value,
        "magnitude": witness.magnitude,
        "certified_floor": witness.certified_floor,
    }
    if isinstance(witness.payload, PeriodicOrbit):
        payload["orbit"] = {
            "period": witness.payload.period,
            "denominator": witness.payload.denominator,
            "numerators": [list(pair) for pair in witness.payload.numerators],
        }
    elif isinstance(witness.payload, AccessibleCycle):
        payload["cycle"] = {
            "anchor": list(witness.payload.anchor.as_tuple()),
            "legs": [[leg.kind, leg.displacement] for leg in witness.payload.path.legs],
        }
    return payload


def classification_payload(
    result: Result[TransferSolution, ObstructionWitness],
    holder: Optional[HolderEstimate] = None,
    deviation: Optional[float] = None,
) -> Dict[str, Any]:
    if not pipeline.is_successful(result):
        return {"verdict": "obstructed", "witness": _payload_of_witness(result.failure())}
    sol = result.unwrap()
    payload: Dict[str, Any] = {
        "verdict": "coboundary",
        "c": sol.c,
        "grid_n": sol.grid_n,
        "tol": sol.tol,
        "anchor": list(sol.anchor.as_tuple()),
        "residual_sup": sol.residual_sup,
        "consistency_spread": sol.consistency_spread,
        "max_pcf_error": float(sol.pcf_errors.max()),
    }
    if holder is not None:
        payload["holder"] = holder_payload(holder)
    if deviation is not None:
        payload["sup_deviation"] = deviation
    return payload


def grid_csv(sol: TransferSolution) -> str:
    return csv_text(GRID_HEADER, grid_rows(sol))


def bunching_csv(reports: Sequence[BunchingReport]) -> str:
    rows = [
        (report.kind, report.order, check.name, check.lhs, check.rhs, check.holds, check.margin)
        for report in reports
        for check in report.checks
    ]
    return csv_text(BUNCHING_HEADER, rows)


def journe_rows(report: JourneReport) -> List[Sequence[Any]]:
    return [
        (grid.m, grid.R, grid.eta, grid.ratio, exponent)
        for grid, exponent in zip(report.grids, report.row_exponents)
    ]


def journe_payload(report: JourneReport, agreement: Optional[float] = None) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "mode": "journe",
        "order": report.order,
        "alpha": report.alpha,
        "verdict": report.verdict,
        "max_ratio": report.max_ratio,
        "ratio_trend": report.ratio_trend,
        "decay_exponents": {"c_{}_{}".format(p, q): value for (p, q), value in sorted(report.decay_exponents.items())},
        "polynomial": _monomials(report.polynomial.to_monomials()),
        "grids_within_radius_bound": all(grid.radius_ok for grid in report.grids),
        "grids_within_ratio_bound": all(grid.ratio_ok for grid in report.grids),
    }
    if agreement is not None:
        payload["cone_agreement"] = agreement
    return payload


def _monomials(monomials: Dict[Any, Any]) -> Dict[str, float]:
    return {
        "x^" + "".join(str(e) for e in exponents): float(value[0])
        for exponents, value in sorted(monomials.items())
    }


def expansion_payload(report: ExpansionReport) -> Dict[str, Any]:
    return {
        "mode": "expansion",
        "order": report.order,
        "alpha": report.alpha,
        "fit": report.mode,
        "C": report.C,
        "ceiling": report.ceiling,
        "verdict": report.verdict,
        "polynomial": _monomials(report.polynomial.to_monomials()),
    }


def holder_payload(estimate: HolderEstimate) -> Dict[str, Any]:
    return {
        "alpha": estimate.alpha,
        "r_squared": estimate.r_squared,
        "flagged": estimate.flagged,
        "reason": estimate.reason,
        "pairs": estimate.pair_count,
        "bins": [[d, m] for d, m in zip(estimate.bin_distances.tolist(), estimate.bin_increments.tolist())],
    }


def pairs_csv(estimate: HolderEstimate) -> str:
    return csv_text(PAIRS_HEADER, pair_rows(estimate))


def jets_payload(family: str, report: FiberContractionReport, h1_gap: float) -> Dict[str, Any]:
    return {
        "family": family,
        "order": report.order,
        "kappa": report.kappa,
        "epsilon": report.epsilon,
        "L": report.L,
        "max_ratio": report.max_ratio,
        "pairs_used": report.pairs_used,
        "skipped": report.skipped,
        "hypotheses": [check_payload(check) for check in report.hypotheses],
        "holds": report.holds,
        "h1_gap": h1_gap,
    }


def periodic_csv(rows: Iterable[Sequence[Any]]) -> str:
    return csv_text(PERIODIC_HEADER, rows)
