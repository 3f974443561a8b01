"""Recovering fields and couplings from spectral moduli.

The engine walks the segments of an access plan.  Each segment starts from
a site whose eigenvector coefficients are known, either measured moduli at
an accessed leaf or a column derived by earlier segments, and repeatedly
applies the site sum rule: subtracting the known neighbor terms from
(E_j - b_n) v_j(n) leaves a residual vector whose squared norm is the
squared coupling to the one unresolved neighbor, and dividing by that
coupling yields the next eigenvector column.

Columns seeded from moduli carry an unknown per-eigenstate sign relative
to the reference gauge.  Squares never see those signs, so fields and
coupling magnitudes are unaffected; whenever two sign families meet at a
shared site the relative signs are resolved componentwise and the families
merged.  Cycle couplings never appear alone in a sum rule, so their squares
are solved jointly from second (and, for even cycles, third) central
moments of the cycle sites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    IllConditionedError,
    InconsistentDataError,
    InputError,
    NearZeroDivisionError,
    RankDeficientError,
    SignAmbiguityError,
)
from .graphs import AccessPlan, BranchPeel, CyclePlan, Edge, NetworkGraph, edge_key
from .measurement import SpectralMeasurement
from .spectral import HamiltonianParams

REFERENCE_FAMILY = "reference"


class CoefficientTable:
    """Working store of eigenvector columns grouped into sign families.

    Every tracked site belongs to exactly one family; a family's columns
    share a common (unknown) per-eigenstate sign relative to the true
    gauge.  Merging two families fixes their relative signs using the
    column both computed for a shared site.
    """

    def __init__(self, eigenvalues: np.ndarray):
        self.eigenvalues = np.asarray(eigenvalues, dtype=float)
        self.families: dict[str, dict[int, np.ndarray]] = {}
        self.node_family: dict[int, str] = {}
        self.mismatch_log: dict[str, float] = {}

    def seed(self, family: str, node: int, vector: np.ndarray) -> None:
        if family in self.families:
            raise InputError(f"family {family!r} already exists")
        if node in self.node_family:
            raise InputError(f"site {node} already belongs to a family")
        self.families[family] = {node: np.asarray(vector, dtype=float)}
        self.node_family[node] = family

    def add(self, family: str, node: int, vector: np.ndarray) -> None:
        assert node not in self.node_family, f"site {node} claimed twice"
        self.families[family][node] = vector
        self.node_family[node] = family

    def family_of(self, node: int) -> str | None:
        return self.node_family.get(node)

    def vector(self, node: int) -> np.ndarray:
        family = self.node_family.get(node)
        if family is None:
            raise InputError(f"no eigenvector column known at site {node}")
        return self.families[family][node]

    def merge(
        self, shared: int, incoming: str, vector: np.ndarray, overlap_tol: float
    ) -> str:
        """Fold the ``incoming`` family into the one already holding ``shared``.

        ``vector`` is the column the incoming family just derived for the
        shared site.  Componentwise products of the two columns fix the
        relative signs; eigenstates in which the incoming family carries no
        weight at all are sign-free and default to +1.  The disagreement
        between the two columns, after sign alignment, is recorded in
        ``mismatch_log``.
        """
        holder = self.node_family[shared]
        assert holder != incoming, "merge within one family"
        existing = self.families[holder][shared]
        arriving = np.asarray(vector, dtype=float)

        incoming_cols = list(self.families[incoming].values()) + [arriving]
        holder_cols = list(self.families[holder].values())
        alive_inc = np.max(np.abs(np.stack(incoming_cols)), axis=0) > overlap_tol
        alive_hold = np.max(np.abs(np.stack(holder_cols)), axis=0) > overlap_tol
        relevant = alive_inc & alive_hold
        weak = relevant & (
            (np.abs(arriving) <= overlap_tol) | (np.abs(existing) <= overlap_tol)
        )
        if np.any(weak):
            raise SignAmbiguityError(shared, [int(j) for j in np.nonzero(weak)[0]])
        eps = np.where(relevant, np.sign(arriving) * np.sign(existing), 1.0)

        # keep the reference family's name when it is on either side
        if incoming == REFERENCE_FAMILY:
            src, dst = holder, incoming
            self.families[dst][shared] = eps * existing
            del self.families[src][shared]
        else:
            src, dst = incoming, holder
        for node, col in self.families[src].items():
            self.families[dst][node] = eps * col
            self.node_family[node] = dst
        del self.families[src]
        self.node_family[shared] = dst

        mismatch = float(np.max(np.abs(eps * arriving - existing)))
        key = f"merge_{shared}"
        self.mismatch_log[key] = max(self.mismatch_log.get(key, 0.0), mismatch)
        return dst


def resolve_family_signs(
    table: CoefficientTable,
    junction: int,
    incoming: str,
    vector: np.ndarray,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> str:
    """Public entry point for merging sign families at a junction."""
    return table.merge(junction, incoming, vector, tolerances.overlap_tol)


def _known_neighbors(couplings: dict[Edge, float], node: int):
    for (a, b), c in couplings.items():
        if a == node:
            yield b, c
        elif b == node:
            yield a, c


def _site_field(eigs: np.ndarray, vec: np.ndarray) -> float:
    return float(np.sum(eigs * vec * vec))


def _run_segment(
    table: CoefficientTable,
    family: str,
    nodes: tuple[int, ...],
    terminal: int,
    signs: dict[Edge, int],
    fields: dict[int, float],
    couplings: dict[Edge, float],
    residuals: dict[str, float],
    tolerances: Tolerances,
) -> None:
    """Propagate eigenvector columns along one segment.

    Consumes the sum rule of every site in ``nodes`` to extract the
    coupling toward the following site; the terminal site only receives its
    column.  All sites in ``nodes`` must end up with their known-coupled
    neighbors inside ``family``, which the access-plan ordering guarantees.
    """
    eigs = table.eigenvalues
    seq = (*nodes, terminal)
    for i, cur in enumerate(nodes):
        nxt = seq[i + 1]
        vec = table.families[family][cur]
        b = fields.get(cur)
        if b is None:
            b = _site_field(eigs, vec)
            fields[cur] = b
        else:
            drift = abs(b - _site_field(eigs, vec))
            key = f"field_{cur}"
            residuals[key] = max(residuals.get(key, 0.0), drift)

        r = (eigs - b) * vec
        for u, c in _known_neighbors(couplings, cur):
            assert u != nxt, f"edge to {nxt} resolved twice"
            assert table.family_of(u) == family, (
                f"neighbor {u} of {cur} is outside family {family!r}"
            )
            r = r - c * table.families[family][u]

        c_sq = float(np.sum(r * r))
        edge = edge_key(cur, nxt)
        if c_sq <= tolerances.coupling_tol**2:
            raise NearZeroDivisionError(cur, edge, math.sqrt(max(c_sq, 0.0)))
        if edge not in signs:
            raise InputError(f"no declared sign for edge {edge}")
        c = signs[edge] * math.sqrt(c_sq)
        couplings[edge] = c
        nxt_vec = r / c

        if i + 1 < len(nodes):
            table.add(family, nxt, nxt_vec)
            continue
        holder = table.family_of(terminal)
        if holder is None:
            table.add(family, terminal, nxt_vec)
        elif holder == family:
            drift = float(np.max(np.abs(nxt_vec - table.families[family][terminal])))
            key = f"merge_{terminal}"
            table.mismatch_log[key] = max(table.mismatch_log.get(key, 0.0), drift)
        else:
            table.merge(terminal, family, nxt_vec, tolerances.overlap_tol)


def reconstruct_chain(
    meas: SpectralMeasurement,
    path: tuple[int, ...],
    signs: dict[Edge, int],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[dict[Edge, float], dict[int, float], CoefficientTable]:
    """Recover fields and couplings along a path from its first site's moduli.

    The first site seeds the reference family (its moduli are its gauge-fixed
    amplitudes); each subsequent column follows from the sum-rule recursion.
    Fields are returned for every path site including the terminal.
    """
    if len(path) < 1 or len(set(path)) != len(path):
        raise InputError("chain path must list distinct sites")
    table = CoefficientTable(meas.eigenvalues)
    table.seed(REFERENCE_FAMILY, path[0], meas.moduli_of(path[0]).copy())
    fields: dict[int, float] = {}
    couplings: dict[Edge, float] = {}
    residuals: dict[str, float] = {}
    if len(path) > 1:
        _run_segment(
            table,
            REFERENCE_FAMILY,
            tuple(path[:-1]),
            path[-1],
            signs,
            fields,
            couplings,
            residuals,
            tolerances,
        )
    terminal = path[-1]
    if terminal not in fields:
        fields[terminal] = _site_field(table.eigenvalues, table.vector(terminal))
    return couplings, fields, table


def peel_branch(
    table: CoefficientTable,
    meas: SpectralMeasurement,
    peel: BranchPeel,
    signs: dict[Edge, int],
    fields: dict[int, float],
    couplings: dict[Edge, float],
    residuals: dict[str, float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> None:
    """Run one peel segment against the shared table and result dicts.

    Measured segments seed a fresh sign family from the head's moduli;
    derived segments continue in whatever family holds the head column.
    """
    if peel.seeded_by_measurement:
        if table.family_of(peel.head) is not None:
            raise InputError(f"segment head {peel.head} already has a column")
        family = f"branch:{peel.head}"
        table.seed(family, peel.head, meas.moduli_of(peel.head).copy())
    else:
        family = table.family_of(peel.head)
        if family is None:
            raise InputError(
                f"derived segment head {peel.head} has no eigenvector column yet"
            )
    _run_segment(
        table,
        family,
        peel.nodes,
        peel.terminal,
        signs,
        fields,
        couplings,
        residuals,
        tolerances,
    )


@dataclass(frozen=True)
class CycleDiagnostics:
    """How the cycle moment solve went."""

    condition_number: float
    moments_used: tuple[str, ...]
    rank: int
    min_square: float
    lstsq_residual: float


def solve_cycle_moments(
    plan: CyclePlan,
    table: CoefficientTable,
    meas: SpectralMeasurement,
    signs: dict[Edge, int],
    *,
    fields: dict[int, float],
    couplings: dict[Edge, float],
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[dict[Edge, float], CycleDiagnostics, tuple[str, ...]]:
    """Solve for squared cycle couplings from site central moments.

    Each cycle site contributes one second-moment equation: the sum of the
    squared couplings on its two cycle edges, after removing known tree
    contributions.  Odd cycles make that system full rank.  Even cycles
    have an alternating null vector, so third-moment equations, whose
    coefficients are field differences across the cycle edges, are added;
    if the fields carry no differences the system stays rank deficient and
    the cycle cannot be resolved.
    """
    eigs = table.eigenvalues
    cyc = plan.cycle
    length = len(cyc)
    cyc_edges = [edge_key(a, b) for a, b in zip(cyc, cyc[1:])]
    cyc_edges.append(edge_key(cyc[-1], cyc[0]))
    col = {e: i for i, e in enumerate(cyc_edges)}
    measured = set(plan.measured)

    weights: dict[int, np.ndarray] = {}
    for n in cyc:
        if n in measured:
            m = meas.moduli_of(n)
            weights[n] = m * m
            b = _site_field(eigs, m)
        else:
            vec = table.vector(n)
            weights[n] = vec * vec
            b = _site_field(eigs, vec)
        assert n not in fields, f"cycle site {n} field set twice"
        fields[n] = b

    def tree_terms(n: int):
        for u, c in _known_neighbors(couplings, n):
            if edge_key(n, u) not in col:
                yield u, c

    rows = []
    rhs = []
    for i, n in enumerate(cyc):
        prev_e = cyc_edges[i - 1]
        next_e = cyc_edges[i]
        if n in measured:
            s = float(np.sum((eigs - fields[n]) ** 2 * weights[n]))
        else:
            vec = table.vector(n)
            family = table.family_of(n)
            r = (eigs - fields[n]) * vec
            for u, c in tree_terms(n):
                assert table.family_of(u) == family, (
                    f"tree neighbor {u} of cycle site {n} is outside its family"
                )
                r = r - c * table.vector(u)
            s = float(np.sum(r * r))
        row = np.zeros(length)
        row[col[prev_e]] = 1.0
        row[col[next_e]] = 1.0
        rows.append(row)
        rhs.append(s)

    moments_used = ["second"]
    if length % 2 == 0:
        moments_used.append("third")
        field_scale = max(1.0, max(abs(fields[n]) for n in cyc))
        for i, n in enumerate(cyc):
            prev_n = cyc[i - 1]
            next_n = cyc[(i + 1) % length]
            third = float(np.sum((eigs - fields[n]) ** 3 * weights[n]))
            for u, c in tree_terms(n):
                third -= c * c * (fields[u] - fields[n])
            row = np.zeros(length)
            row[col[cyc_edges[i - 1]]] = fields[prev_n] - fields[n]
            row[col[cyc_edges[i]]] = fields[next_n] - fields[n]
            scale = float(np.max(np.abs(row)))
            if scale <= 1e-12 * field_scale:
                continue
            rows.append(row / scale)
            rhs.append(third / scale)

    matrix = np.stack(rows)
    vector = np.asarray(rhs)
    solution, _, rank, sv = np.linalg.lstsq(matrix, vector, rcond=None)
    if rank < length:
        raise RankDeficientError(
            f"cycle moment system has rank {rank} for {length} edges; "
            "the field pattern leaves the even cycle unresolved"
        )
    condition = float(sv[0] / sv[-1]) if sv[-1] > 0 else float("inf")
    if condition > tolerances.condition_limit:
        raise IllConditionedError(
            f"cycle moment system condition number {condition:.3e} exceeds "
            f"{tolerances.condition_limit:.3e}",
            condition,
        )
    fit_residual = float(np.linalg.norm(matrix @ solution - vector))

    largest = float(np.max(solution))
    floor = -tolerances.slack_factor * max(largest, 1.0)
    cycle_couplings: dict[Edge, float] = {}
    for e in cyc_edges:
        x = float(solution[col[e]])
        if x < floor:
            raise InconsistentDataError(
                f"squared coupling on cycle edge {e} solved to {x:.3e}; "
                "the moment data contradicts the declared topology"
            )
        x = max(x, 0.0)
        cycle_couplings[e] = signs[e] * math.sqrt(x)

    diagnostics = CycleDiagnostics(
        condition_number=condition,
        moments_used=tuple(moments_used),
        rank=int(rank),
        min_square=float(np.min(solution)),
        lstsq_residual=fit_residual,
    )
    flags = ("RankAugmented",) if "third" in moments_used else ()
    return cycle_couplings, diagnostics, flags


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    """Recovered parameters plus everything needed to judge them."""

    params: HamiltonianParams
    residuals: dict[str, float]
    flags: tuple[str, ...]
    cycle_diagnostics: CycleDiagnostics | None = None


def result_to_json(result: ReconstructionResult) -> dict:
    diag = None
    if result.cycle_diagnostics is not None:
        d = result.cycle_diagnostics
        diag = {
            "condition_number": d.condition_number,
            "moments_used": list(d.moments_used),
            "rank": d.rank,
            "min_square": d.min_square,
            "lstsq_residual": d.lstsq_residual,
        }
    return {
        "b": {str(n): b for n, b in sorted(result.params.local_fields.items())},
        "c": {f"{u}-{v}": c for (u, v), c in sorted(result.params.couplings.items())},
        "residuals": dict(sorted(result.residuals.items())),
        "flags": list(result.flags),
        "cycle_diagnostics": diag,
    }


def reconstruct(
    g: NetworkGraph,
    plan: AccessPlan,
    meas: SpectralMeasurement,
    *,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
    known_fields: dict[int, float] | None = None,
) -> ReconstructionResult:
    """Run a full reconstruction of ``g`` from the planned measurements.

    Leftover site equations (those no segment or cycle consumed) become
    consistency residuals keyed ``site_<n>``; family merges report their
    column disagreement under ``merge_<n>``.  Externally supplied fields
    are not fed into the recursion, they are only compared against the
    recovered ones under ``field_supplied_<n>``.
    """
    plan.validate(g)
    missing = set(plan.access_set) - set(meas.nodes)
    if missing:
        raise InputError(f"measurement lacks accessed sites {sorted(missing)}")
    if len(meas.eigenvalues) != len(g.nodes):
        raise InputError(
            f"measurement resolves {len(meas.eigenvalues)} eigenstates for a "
            f"{len(g.nodes)}-site network; the full spectrum is required"
        )

    signs = g.sign_of
    table = CoefficientTable(meas.eigenvalues)
    fields: dict[int, float] = {}
    couplings: dict[Edge, float] = {}
    residuals: dict[str, float] = {}
    flags: list[str] = []

    table.seed(REFERENCE_FAMILY, plan.reference, meas.moduli_of(plan.reference).copy())
    path = plan.reference_path
    if len(path) > 1:
        _run_segment(
            table,
            REFERENCE_FAMILY,
            tuple(path[:-1]),
            path[-1],
            signs,
            fields,
            couplings,
            residuals,
            tolerances,
        )

    for peel in plan.peel_schedule:
        peel_branch(
            table, meas, peel, signs, fields, couplings, residuals, tolerances
        )

    diagnostics = None
    if plan.cycle_plan is not None:
        cycle_couplings, diagnostics, cycle_flags = solve_cycle_moments(
            plan.cycle_plan,
            table,
            meas,
            signs,
            fields=fields,
            couplings=couplings,
            tolerances=tolerances,
        )
        couplings.update(cycle_couplings)
        flags.extend(cycle_flags)

    # leftover equations become consistency checks
    eigs = table.eigenvalues
    for n in plan.check_sites(g):
        vec = table.vector(n)
        family = table.family_of(n)
        if n not in fields:
            fields[n] = _site_field(eigs, vec)
        r = (eigs - fields[n]) * vec
        outside = 0.0
        for u, c in _known_neighbors(couplings, n):
            if table.family_of(u) == family:
                r = r - c * table.families[family][u]
            else:
                outside += c * c
        residuals[f"site_{n}"] = abs(float(np.sum(r * r)) - outside)

    for key, value in table.mismatch_log.items():
        residuals[key] = max(residuals.get(key, 0.0), value)

    if known_fields:
        unknown = set(known_fields) - set(g.nodes)
        if unknown:
            raise InputError(f"supplied fields for unknown sites {sorted(unknown)}")
        for n, b in known_fields.items():
            residuals[f"field_supplied_{n}"] = abs(fields[n] - float(b))

    assert set(fields) == set(g.nodes), "not every site received a field"
    assert set(couplings) == set(g.edges), "not every edge received a coupling"
    params = HamiltonianParams(fields, couplings)
    return ReconstructionResult(
        params=params,
        residuals=residuals,
        flags=tuple(sorted(set(flags))),
        cycle_diagnostics=diagnostics,
    )
