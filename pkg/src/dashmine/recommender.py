"""Arrangement and coordination recommendation from a mined rule set.

Pipeline: enumerate all exact tilings of the 4x4 grid into one rectangle
per view, assign views to rectangles in every order, prune with the
single-view (S2S) rules, pick the best filter/brush state per view pair,
and rank survivors by the importance-weighted sum of violated rules
(ascending), breaking ties by obeyed importance and canonical order.

Every rule touches at most one view or one ordered view pair, so rule
scoring decomposes over (view, rectangle), (view pair, rectangle pair) and
the 9 per-pair coordination states; everything a rule can fire on is
tabulated once and candidate evaluation is pure lookup.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from dashmine.corpus import GRID_N, GridArrangement, ViewSpec
from dashmine.features import (
    arrangement_relationship,
    arrangement_values,
    block_bits,
    coordination_relationship,
    data_encoding_relationship,
    data_encoding_values,
)
from dashmine.mining import MAPPING_BY_ID, DecisionRule, Literal, RuleSet

DEFAULT_PRUNE_FRAC = 0.01
DEFAULT_PRUNE_MIN = 10
MAX_VIEWS = 8

LINK_KINDS = ("none", "filter", "brush")
# Joint coordination states (link A->B, link B->A) in canonical order.
PAIR_STATES = tuple(itertools.product(LINK_KINDS, LINK_KINDS))
_STATE_INDEX = {s: i for i, s in enumerate(PAIR_STATES)}
_MIRROR_STATE = np.array(
    [_STATE_INDEX[(b, a)] for (a, b) in PAIR_STATES], dtype=np.int64
)
_STATE_LINKS = np.array(
    [(a != "none") + (b != "none") for (a, b) in PAIR_STATES], dtype=np.int64
)


class CapacityError(ValueError):
    """Too many views for the exact enumerator."""


@dataclass
class Candidate:
    """A fully specified dashboard proposal."""

    assignment: dict[str, tuple[int, int, int, int]]
    coordination: dict[tuple[str, str], str]
    s2s_score: float
    full_cost: float
    obeyed_importance: float
    breakdown: list[dict] = field(default_factory=list)

    def links(self) -> list[tuple[str, str, str]]:
        return [
            (a, b, kind)
            for (a, b), kind in sorted(self.coordination.items())
            if kind != "none"
        ]

    def to_dict(self) -> dict:
        return {
            "assignment": {
                vid: {"gx": r[0], "gy": r[1], "gw": r[2], "gh": r[3]}
                for vid, r in sorted(self.assignment.items())
            },
            "coordinations": [
                {"source": a, "target": b, "kind": kind}
                for a, b, kind in self.links()
            ],
            "s2s_score": self.s2s_score,
            "full_cost": self.full_cost,
            "obeyed_importance": self.obeyed_importance,
            "breakdown": self.breakdown,
        }


# ---------------------------------------------------------------------------
# Tiling enumeration


def all_rects(n: int = GRID_N) -> list[tuple[int, int, int, int]]:
    return sorted(
        (gx, gy, gw, gh)
        for gx in range(n)
        for gy in range(n)
        for gw in range(1, n - gx + 1)
        for gh in range(1, n - gy + 1)
    )


def _rect_mask(rect: tuple[int, int, int, int], n: int = GRID_N) -> int:
    gx, gy, gw, gh = rect
    mask = 0
    for yy in range(gy, gy + gh):
        for xx in range(gx, gx + gw):
            mask |= 1 << (yy * n + xx)
    return mask


@lru_cache(maxsize=None)
def _tilings_from(mask: int, k: int) -> tuple[tuple, ...]:
    """All ways to finish covering the grid with k more rectangles.

    Always extends from the topmost-leftmost uncovered cell, so every exact
    cover is produced exactly once; memoized on (occupancy mask, k).
    """
    full = (1 << (GRID_N * GRID_N)) - 1
    if mask == full:
        return ((),) if k == 0 else ()
    if k == 0:
        return ()
    free = (~mask) & full
    cell = (free & -free).bit_length() - 1
    cy, cx = divmod(cell, GRID_N)
    out = []
    for gw in range(1, GRID_N - cx + 1):
        if mask & (1 << (cy * GRID_N + cx + gw - 1)):
            break
        for gh in range(1, GRID_N - cy + 1):
            rect = (cx, cy, gw, gh)
            rmask = _rect_mask(rect)
            if rmask & mask:
                break
            for rest in _tilings_from(mask | rmask, k - 1):
                out.append((rect,) + rest)
    return tuple(out)


@lru_cache(maxsize=None)
def enumerate_tilings(
    n_views: int,
) -> tuple[tuple[tuple[int, int, int, int], ...], ...]:
    """All exact tilings of the 4x4 grid into n_views rectangles.

    Canonical form: each tiling's rectangles sorted ascending, tilings in
    lexicographic order.
    """
    if not 1 <= n_views <= GRID_N * GRID_N:
        raise ValueError(f"n_views must be in 1..{GRID_N * GRID_N}")
    tilings = {tuple(sorted(t)) for t in _tilings_from(0, n_views)}
    return tuple(sorted(tilings))


# ---------------------------------------------------------------------------
# Rule compilation


def _grid_arr(rect: tuple[int, int, int, int]) -> GridArrangement:
    return GridArrangement(view="_", gx=rect[0], gy=rect[1], gw=rect[2], gh=rect[3])


class _BitTable:
    """Bit matrix over one subject domain with named columns."""

    def __init__(self, rows: list[dict[str, bool]]):
        names = tuple(rows[0])
        self.col_of = {n: i for i, n in enumerate(names)}
        self.matrix = np.array(
            [[bool(r[n]) for n in names] for r in rows], dtype=bool
        )

    @classmethod
    def from_parts(cls, parts: list[tuple[str, "np.ndarray", dict]]) -> "_BitTable":
        """Concatenate prefixed bit matrices without per-row dicts."""
        table = cls.__new__(cls)
        mats = []
        col_of = {}
        offset = 0
        for prefix, matrix, cols in parts:
            mats.append(matrix)
            for name, idx in cols.items():
                col_of[f"{prefix}{name}"] = offset + idx
            offset += matrix.shape[1]
        table.matrix = np.hstack(mats)
        table.col_of = col_of
        return table

    def fired(self, condition: tuple[Literal, ...]) -> np.ndarray:
        out = np.ones(self.matrix.shape[0], dtype=bool)
        for lit in condition:
            col = self.matrix[:, self.col_of[lit.feature]]
            out &= ~col if lit.negated else col
        return out

    def satisfied(self, target: Literal) -> np.ndarray:
        col = self.matrix[:, self.col_of[target.feature]]
        return ~col if target.negated else col


_PA_TABLE_CACHE: dict[tuple, _BitTable] = {}
_MATRIX_KEYS = ("M1", "M2", "M3", "M4", "M5", "M6")


class CompiledRules:
    """A rule set compiled against a fixed list of views.

    Aggregates rule importance into violation/obedience lookup tables:

        M1[view, rect]            single-view (S2S) rules
        M2[pair, rect_of_A]       pair-conditioned rules on A's arrangement
        M3[pair, rect_pair]       rules targeting the pair's relative layout
        M4[pair, state]           pair-conditioned coordination rules
        M5[state, rect_of_A]      coordination-conditioned arrangement rules
        M6[state, rect_pair]      coordination <-> relative-layout rules
    """

    def __init__(self, ruleset: RuleSet, views: list[ViewSpec]):
        ids = [v.id for v in views]
        if len(set(ids)) != len(ids):
            raise ValueError("view ids must be unique")
        self.views = list(views)
        self.n = len(views)
        self.thresholds = ruleset.thresholds
        self.rects = all_rects()
        self.rect_index = {r: i for i, r in enumerate(self.rects)}
        self.rules = list(ruleset.rules)
        n, nr = self.n, len(self.rects)

        sde = _BitTable(
            [block_bits(data_encoding_values(v), "sde", self.thresholds)
             for v in views]
        )
        sa = _BitTable(
            [block_bits(arrangement_values(_grid_arr(r)), "sa", self.thresholds)
             for r in self.rects]
        )
        pc = _BitTable(
            [
                block_bits(
                    coordination_relationship(
                        None if ka == "none" else ka, None if kb == "none" else kb
                    ),
                    "pc",
                    self.thresholds,
                )
                for ka, kb in PAIR_STATES
            ]
        )
        pa = self._pa_table()

        self.pair_lin = [(a, b) for a in range(n) for b in range(n) if a != b]
        self.pair_index = {p: i for i, p in enumerate(self.pair_lin)}
        npair = len(self.pair_lin)

        pde_rows = [
            block_bits(
                data_encoding_relationship(views[a], views[b]), "pde",
                self.thresholds,
            )
            for a, b in self.pair_lin
        ]
        pde = _BitTable(pde_rows) if pde_rows else None
        a_idx = np.array([a for a, _ in self.pair_lin], dtype=np.int64)
        b_idx = np.array([b for _, b in self.pair_lin], dtype=np.int64)
        pair_cond = (
            _BitTable.from_parts(
                [
                    ("a_", sde.matrix[a_idx], sde.col_of),
                    ("b_", sde.matrix[b_idx], sde.col_of),
                    ("", pde.matrix, pde.col_of),
                ]
            )
            if npair
            else None
        )
        ra_idx = np.repeat(np.arange(nr), nr)
        rb_idx = np.tile(np.arange(nr), nr)
        sa_pair = _BitTable.from_parts(
            [
                ("a_", sa.matrix[ra_idx], sa.col_of),
                ("b_", sa.matrix[rb_idx], sa.col_of),
            ]
        )

        self.viol = {}
        self.obey = {}
        shapes = {
            "M1": (n, nr),
            "M2": (npair, nr),
            "M3": (npair, nr * nr),
            "M4": (npair, 9),
            "M5": (9, nr),
            "M6": (9, nr * nr),
        }
        batches: dict[str, list[tuple[np.ndarray, np.ndarray, float]]] = {
            k: [] for k in _MATRIX_KEYS
        }
        self.s2s_rules: list[DecisionRule] = []
        self.rule_domains: list[tuple[DecisionRule, str, np.ndarray, np.ndarray]] = []

        for rule in self.rules:
            mapping = MAPPING_BY_ID[rule.mapping]
            cond_group = mapping.condition_groups[0]
            tgt_group = mapping.target_group
            if mapping.subject == "view":
                key, fired, sat = "M1", sde.fired(rule.condition), sa.satisfied(
                    rule.target
                )
                self.s2s_rules.append(rule)
            elif cond_group in ("sde", "pde") and tgt_group == "sa":
                key = "M2"
                fired = pair_cond.fired(rule.condition)
                sat = sa.satisfied(
                    Literal(rule.target.feature[2:], rule.target.negated)
                )
            elif cond_group in ("sde", "pde") and tgt_group == "pa":
                key = "M3"
                fired = pair_cond.fired(rule.condition)
                sat = pa.satisfied(rule.target)
            elif cond_group in ("sde", "pde") and tgt_group == "pc":
                key = "M4"
                fired = pair_cond.fired(rule.condition)
                sat = pc.satisfied(rule.target)
            elif cond_group == "pc" and tgt_group == "sa":
                key = "M5"
                fired = pc.fired(rule.condition)
                sat = sa.satisfied(
                    Literal(rule.target.feature[2:], rule.target.negated)
                )
            elif cond_group == "pa" and tgt_group == "pc":
                key = "M6"
                fired = pa.fired(rule.condition)
                sat = pc.satisfied(rule.target)
            elif cond_group == "sa" and tgt_group == "pc":
                key = "M6"
                fired = sa_pair.fired(rule.condition)
                sat = pc.satisfied(rule.target)
            elif cond_group == "pc" and tgt_group == "pa":
                key = "M6"
                fired = pc.fired(rule.condition)
                sat = pa.satisfied(rule.target)
            else:  # pragma: no cover - the mapping registry covers all cases
                raise ValueError(f"unsupported mapping {rule.mapping}")
            batches[key].append((fired, sat, rule.importance))
            self.rule_domains.append((rule, key, fired, sat))

        for key in _MATRIX_KEYS:
            viol = np.zeros(shapes[key])
            obey = np.zeros(shapes[key])
            for fired, sat, imp in batches[key]:
                if key == "M6" and fired.shape[0] != 9:
                    # fired over rect pairs, satisfaction over states
                    viol += imp * np.outer(~sat, fired)
                    obey += imp * np.outer(sat, fired)
                else:
                    viol += imp * np.outer(fired, ~sat)
                    obey += imp * np.outer(fired, sat)
            self.viol[key] = viol
            self.obey[key] = obey

        # S2S net score per (view, rect): obeyed minus violated importance.
        self.s2s_net = self.obey["M1"] - self.viol["M1"]
        self._a_idx = a_idx
        self._b_idx = b_idx

    def _pa_table(self) -> _BitTable:
        key = (
            round(self.thresholds["center_distance"], 12),
            round(self.thresholds["rel_angle"], 12),
        )
        if key not in _PA_TABLE_CACHE:
            rects = all_rects()
            rows = []
            for ra in rects:
                arr_a = _grid_arr(ra)
                for rb in rects:
                    rows.append(
                        block_bits(
                            arrangement_relationship(arr_a, _grid_arr(rb)),
                            "pa",
                            self.thresholds,
                        )
                    )
            _PA_TABLE_CACHE[key] = _BitTable(rows)
        return _PA_TABLE_CACHE[key]

    # -- candidate scoring ---------------------------------------------------

    def base_scores(self, rect_of_view: np.ndarray) -> tuple[float, float]:
        """Violation/obedience sums of all coordination-free rules."""
        n, nr = self.n, len(self.rects)
        vidx = np.arange(n)
        viol = float(self.viol["M1"][vidx, rect_of_view].sum())
        obey = float(self.obey["M1"][vidx, rect_of_view].sum())
        if self.pair_lin:
            pidx = np.arange(len(self.pair_lin))
            ra = rect_of_view[self._a_idx]
            rb = rect_of_view[self._b_idx]
            rp = ra * nr + rb
            viol += float(
                self.viol["M2"][pidx, ra].sum() + self.viol["M3"][pidx, rp].sum()
            )
            obey += float(
                self.obey["M2"][pidx, ra].sum() + self.obey["M3"][pidx, rp].sum()
            )
        return viol, obey

    def best_coordination(
        self, rect_of_view: np.ndarray
    ) -> tuple[dict[tuple[int, int], str], float, float]:
        """Exact per-pair optimum over the 9 joint link states.

        Minimizes each pair's violated importance; ties prefer fewer links,
        then canonical state order.  Returns (directed link kinds keyed by
        view-index pairs, violation sum, obedience sum of chosen states).
        """
        nr = len(self.rects)
        states = np.arange(9)
        mirror = _MIRROR_STATE
        links: dict[tuple[int, int], str] = {}
        viol_sum = 0.0
        obey_sum = 0.0
        for a in range(self.n):
            for b in range(a + 1, self.n):
                ia = self.pair_index[(a, b)]
                ib = self.pair_index[(b, a)]
                ra = int(rect_of_view[a])
                rb = int(rect_of_view[b])
                rp_ab = ra * nr + rb
                rp_ba = rb * nr + ra
                cost = (
                    self.viol["M4"][ia, states]
                    + self.viol["M5"][states, ra]
                    + self.viol["M6"][states, rp_ab]
                    + self.viol["M4"][ib, mirror]
                    + self.viol["M5"][mirror, rb]
                    + self.viol["M6"][mirror, rp_ba]
                )
                best = np.lexsort((states, _STATE_LINKS, cost))[0]
                kind_ab, kind_ba = PAIR_STATES[best]
                links[(a, b)] = kind_ab
                links[(b, a)] = kind_ba
                viol_sum += float(cost[best])
                mbest = int(mirror[best])
                obey_sum += float(
                    self.obey["M4"][ia, best]
                    + self.obey["M5"][best, ra]
                    + self.obey["M6"][best, rp_ab]
                    + self.obey["M4"][ib, mbest]
                    + self.obey["M5"][mbest, rb]
                    + self.obey["M6"][mbest, rp_ba]
                )
        return links, viol_sum, obey_sum

    def coordination_scores(
        self, rect_of_view: np.ndarray, links: dict[tuple[int, int], str]
    ) -> tuple[float, float]:
        """Violation/obedience sums of the coordination-dependent rules."""
        nr = len(self.rects)
        viol = 0.0
        obey = 0.0
        for a, b in self.pair_lin:
            state = _STATE_INDEX[(links[(a, b)], links[(b, a)])]
            ia = self.pair_index[(a, b)]
            ra = int(rect_of_view[a])
            rb = int(rect_of_view[b])
            rp = ra * nr + rb
            viol += float(
                self.viol["M4"][ia, state]
                + self.viol["M5"][state, ra]
                + self.viol["M6"][state, rp]
            )
            obey += float(
                self.obey["M4"][ia, state]
                + self.obey["M5"][state, ra]
                + self.obey["M6"][state, rp]
            )
        return viol, obey


# ---------------------------------------------------------------------------
# Pipeline stages


@lru_cache(maxsize=8)
def _perm_array(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64)


def _rect_ids(compiled: CompiledRules, tiling) -> np.ndarray:
    return np.array([compiled.rect_index[r] for r in tiling], dtype=np.int64)


def _rect_of_view(perm: np.ndarray, rect_ids: np.ndarray) -> np.ndarray:
    out = np.empty_like(rect_ids)
    out[perm] = rect_ids
    return out


def _s2s_survivors(
    compiled: CompiledRules,
    tilings,
    prune_frac: float,
    prune_min: int,
) -> tuple[list[tuple[int, int, float]], bool]:
    """Top candidates by mean per-view S2S score.

    Returns ((tiling_idx, perm_idx, score) survivors in rank order, pruning
    disabled flag).  Candidate order is canonical: tiling-major, then
    permutation index.
    """
    n = compiled.n
    perms = _perm_array(n)
    n_perms = perms.shape[0]
    total = len(tilings) * n_perms
    disabled = not compiled.s2s_rules
    if disabled or prune_frac >= 1.0:
        keep = total
    else:
        keep = min(total, max(math.ceil(prune_frac * total), min(prune_min, total)))

    scores = np.empty(total, dtype=np.float64)
    for t_idx, tiling in enumerate(tilings):
        rect_ids = _rect_ids(compiled, tiling)
        # perm[i] is the view on tiling rectangle i
        sc = compiled.s2s_net[perms, rect_ids[None, :]].sum(axis=1) / n
        scores[t_idx * n_perms : (t_idx + 1) * n_perms] = sc

    order = np.argsort(-scores, kind="stable")[:keep]
    survivors = [
        (int(ci) // n_perms, int(ci) % n_perms, float(scores[ci])) for ci in order
    ]
    return survivors, disabled


def s2s_prune(
    views: list[ViewSpec],
    tilings,
    ruleset: RuleSet,
    prune_frac: float = DEFAULT_PRUNE_FRAC,
    prune_min: int = DEFAULT_PRUNE_MIN,
) -> list[Candidate]:
    """Prune (tiling, assignment) candidates with single-view rules only."""
    compiled = CompiledRules(ruleset, views)
    survivors, _ = _s2s_survivors(compiled, tilings, prune_frac, prune_min)
    perms = _perm_array(compiled.n)
    out = []
    for t_idx, p_idx, score in survivors:
        rect_ids = _rect_ids(compiled, tilings[t_idx])
        rv = _rect_of_view(perms[p_idx], rect_ids)
        out.append(
            Candidate(
                assignment={
                    v.id: compiled.rects[rv[i]]
                    for i, v in enumerate(compiled.views)
                },
                coordination={},
                s2s_score=score,
                full_cost=float("nan"),
                obeyed_importance=0.0,
            )
        )
    return out


def optimize_coordination(
    candidate: Candidate, ruleset: RuleSet, views: list[ViewSpec]
) -> Candidate:
    """Fill in the cost-minimal coordination for a fully arranged candidate."""
    compiled = CompiledRules(ruleset, views)
    rv = np.array(
        [compiled.rect_index[tuple(candidate.assignment[v.id])] for v in views],
        dtype=np.int64,
    )
    links, viol_c, obey_c = compiled.best_coordination(rv)
    viol_b, obey_b = compiled.base_scores(rv)
    coordination = {
        (views[a].id, views[b].id): kind for (a, b), kind in links.items()
    }
    return Candidate(
        assignment=dict(candidate.assignment),
        coordination=coordination,
        s2s_score=candidate.s2s_score,
        full_cost=viol_b + viol_c,
        obeyed_importance=obey_b + obey_c,
    )


def score_full(
    candidate: Candidate, ruleset: RuleSet, views: list[ViewSpec]
) -> tuple[float, float, list[dict]]:
    """Direct evaluation of every rule against one candidate.

    Returns (full_cost, obeyed_importance, breakdown).  The breakdown lists
    every (rule, subject) pair whose condition fired.
    """
    return _score_full_compiled(CompiledRules(ruleset, views), candidate)


def _score_full_compiled(
    compiled: CompiledRules, candidate: Candidate
) -> tuple[float, float, list[dict]]:
    from dashmine.mining import render_rule

    views = compiled.views
    nr = len(compiled.rects)
    rv = np.array(
        [compiled.rect_index[tuple(candidate.assignment[v.id])] for v in views],
        dtype=np.int64,
    )
    state_of = {}
    for a, b in compiled.pair_lin:
        kind_ab = candidate.coordination.get((views[a].id, views[b].id), "none")
        kind_ba = candidate.coordination.get((views[b].id, views[a].id), "none")
        state_of[(a, b)] = _STATE_INDEX[(kind_ab, kind_ba)]

    cost = 0.0
    obeyed = 0.0
    breakdown: list[dict] = []
    for rule, key, fired, sat in compiled.rule_domains:
        subjects: list[tuple[str, int, int]] = []
        if key == "M1":
            for i, v in enumerate(views):
                subjects.append((v.id, int(fired[i]), int(sat[rv[i]])))
        else:
            for (a, b) in compiled.pair_lin:
                p = compiled.pair_index[(a, b)]
                s = state_of[(a, b)]
                rp = int(rv[a]) * nr + int(rv[b])
                if key == "M2":
                    f, t = fired[p], sat[rv[a]]
                elif key == "M3":
                    f, t = fired[p], sat[rp]
                elif key == "M4":
                    f, t = fired[p], sat[s]
                elif key == "M5":
                    f, t = fired[s], sat[rv[a]]
                elif fired.shape[0] == 9:  # M6, coordination-conditioned
                    f, t = fired[s], sat[rp]
                else:  # M6, layout-conditioned
                    f, t = fired[rp], sat[s]
                subjects.append((f"{views[a].id}|{views[b].id}", int(f), int(t)))
        for subject, f, t in subjects:
            if not f:
                continue
            if t:
                obeyed += rule.importance
            else:
                cost += rule.importance
            breakdown.append(
                {
                    "mapping": rule.mapping,
                    "rule": render_rule(rule),
                    "subject": subject,
                    "importance": rule.importance,
                    "outcome": "obeyed" if t else "violated",
                }
            )
    return cost, obeyed, breakdown


def recommend(
    views: list[ViewSpec],
    ruleset: RuleSet,
    k: int = 3,
    prune_frac: float = DEFAULT_PRUNE_FRAC,
    prune_min: int = DEFAULT_PRUNE_MIN,
) -> list[Candidate]:
    """Top-k dashboard proposals, cheapest violation cost first."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(views) > MAX_VIEWS:
        raise CapacityError(
            f"{len(views)} views exceed the exact enumerator's capacity "
            f"({MAX_VIEWS}); the search space grows as tilings x n!"
        )
    if len(views) < 1:
        raise ValueError("need at least one view")

    compiled = CompiledRules(ruleset, views)
    tilings = enumerate_tilings(len(views))
    survivors, _ = _s2s_survivors(compiled, tilings, prune_frac, prune_min)
    perms = _perm_array(compiled.n)

    scored = []
    for rank, (t_idx, p_idx, s2s) in enumerate(survivors):
        rect_ids = _rect_ids(compiled, tilings[t_idx])
        rv = _rect_of_view(perms[p_idx], rect_ids)
        viol_b, obey_b = compiled.base_scores(rv)
        links, viol_c, obey_c = compiled.best_coordination(rv)
        scored.append(
            (viol_b + viol_c, -(obey_b + obey_c), t_idx, p_idx, rv, links, s2s)
        )
    scored.sort(key=lambda e: (e[0], e[1], e[2], e[3]))

    out = []
    for cost, neg_obey, t_idx, p_idx, rv, links, s2s in scored[:k]:
        assignment = {
            v.id: compiled.rects[rv[i]] for i, v in enumerate(compiled.views)
        }
        coordination = {
            (views[a].id, views[b].id): kind for (a, b), kind in links.items()
        }
        candidate = Candidate(
            assignment=assignment,
            coordination=coordination,
            s2s_score=s2s,
            full_cost=cost,
            obeyed_importance=-neg_obey,
        )
        _, _, breakdown = _score_full_compiled(compiled, candidate)
        candidate.breakdown = breakdown
        out.append(candidate)
    return out
