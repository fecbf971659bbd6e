"""Independent reference implementations for validating the main pipeline.

Everything here recomputes features, binarization, and rule scoring from
scratch (no code shared with the feature or recommender modules) so that a
bug in the production path cannot hide in its own oracle.  These paths favor
clarity over speed and are exercised by the acceptance suite.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

from dashmine.corpus import CHANNELS, DTYPES, GRID_N, MARKS, OPS, ViewSpec
from dashmine.mining import DecisionRule, Literal, RuleSet

_LINKS = ("none", "filter", "brush")
_STATES = tuple(itertools.product(_LINKS, _LINKS))


# ---------------------------------------------------------------------------
# Tiling enumeration by covering the bottom-right-most free cell


def _all_grid_rects() -> list[tuple[int, int, int, int]]:
    out = []
    for gx in range(GRID_N):
        for gy in range(GRID_N):
            for gw in range(1, GRID_N - gx + 1):
                for gh in range(1, GRID_N - gy + 1):
                    out.append((gx, gy, gw, gh))
    return out


def _cells(rect: tuple[int, int, int, int]) -> frozenset[tuple[int, int]]:
    gx, gy, gw, gh = rect
    return frozenset(
        (x, y) for x in range(gx, gx + gw) for y in range(gy, gy + gh)
    )


@lru_cache(maxsize=None)
def _brute_force_all() -> dict[int, list[tuple[tuple[int, int, int, int], ...]]]:
    """Every rectangle cover of the grid, grouped by rectangle count.

    Independent search order: repeatedly covers the bottom-right-most free
    cell (the main enumerator grows from the top-left).
    """
    rect_cells = {r: _cells(r) for r in _all_grid_rects()}
    found: dict[int, list] = {}

    def recurse(free: frozenset, chosen: tuple):
        if not free:
            found.setdefault(len(chosen), []).append(tuple(sorted(chosen)))
            return
        cell = max(free, key=lambda c: (c[1], c[0]))
        for rect, cells in rect_cells.items():
            if cell in cells and cells <= free:
                recurse(free - cells, chosen + (rect,))

    all_cells = frozenset((x, y) for x in range(GRID_N) for y in range(GRID_N))
    recurse(all_cells, ())
    return {k: sorted(set(v)) for k, v in found.items()}


def brute_force_tilings(n_views: int) -> list[tuple[tuple[int, int, int, int], ...]]:
    """All exact n_views-rectangle covers of the 4x4 grid, canonical order."""
    if not 1 <= n_views <= GRID_N * GRID_N:
        raise ValueError(f"n_views must be in 1..{GRID_N * GRID_N}")
    return list(_brute_force_all().get(n_views, []))


# ---------------------------------------------------------------------------
# From-scratch feature bits


def _ref_view_bits(view: ViewSpec, rect, thr: dict[str, float]) -> dict[str, bool]:
    gx, gy, gw, gh = rect
    b: dict[str, bool] = {}
    for dtype in DTYPES:
        count = sum(1 for f in view.fields if f.dtype == dtype)
        b[f"count_{dtype}"] = count >= thr[f"count_{dtype}"]
    for op in OPS:
        count = sum(1 for f in view.fields if f.op == op)
        b[f"count_op_{op}"] = count >= thr[f"count_op_{op}"]
    b["n_fields"] = len(view.fields) >= thr["n_fields"]
    for mark in MARKS:
        b[f"mark={mark}"] = view.mark == mark
    for ch in CHANNELS:
        k = len(view.encodings.get(ch, ()))
        b[f"n_fields_{ch}"] = k >= thr[f"n_fields_{ch}"]
        b[f"uses_{ch}"] = k > 0
    b["gx"] = gx >= thr["gx"]
    b["gy"] = gy >= thr["gy"]
    b["gw"] = gw >= thr["gw"]
    b["gh"] = gh >= thr["gh"]
    b["px_x"] = gx / GRID_N >= thr["px_x"]
    b["px_y"] = gy / GRID_N >= thr["px_y"]
    b["px_w"] = gw / GRID_N >= thr["px_w"]
    b["px_h"] = gh / GRID_N >= thr["px_h"]
    b["grid_area"] = gw * gh >= thr["grid_area"]
    b["aspect"] = gw / gh >= thr["aspect"]
    b["cx"] = gx + gw / 2 >= thr["cx"]
    b["cy"] = gy + gh / 2 >= thr["cy"]
    return b


_OCTANTS = (
    "a_left_of_b",
    "a_bottom_left_of_b",
    "a_below_b",
    "a_bottom_right_of_b",
    "a_right_of_b",
    "a_top_right_of_b",
    "a_above_b",
    "a_top_left_of_b",
)


def _ref_pair_layout_bits(ra, rb, thr: dict[str, float]) -> dict[str, bool]:
    ax, ay, aw, ah = ra
    bx, by, bw, bh = rb
    b: dict[str, bool] = {}
    b["a_larger_area"] = aw * ah > bw * bh
    b["same_width"] = aw == bw
    b["same_height"] = ah == bh
    b["same_area"] = aw * ah == bw * bh
    acx, acy = ax + aw / 2, ay + ah / 2
    bcx, bcy = bx + bw / 2, by + bh / 2
    dist = math.sqrt((bcx - acx) ** 2 + (bcy - acy) ** 2)
    b["center_distance"] = dist >= thr["center_distance"]
    if bcx == acx and bcy == acy:
        angle = 0.0
    else:
        angle = math.degrees(math.atan2(acy - bcy, bcx - acx)) % 360.0
    b["rel_angle"] = angle >= thr["rel_angle"]
    share_v = (ax + aw == bx or bx + bw == ax) and (
        min(ay + ah, by + bh) > max(ay, by)
    )
    share_h = (ay + ah == by or by + bh == ay) and (
        min(ax + aw, bx + bw) > max(ax, bx)
    )
    b["is_neighbour"] = share_v or share_h
    octant = int(((angle + 22.5) % 360.0) / 45.0)
    for i, name in enumerate(_OCTANTS):
        b[name] = i == octant
    return b


def _ref_pair_data_bits(va: ViewSpec, vb: ViewSpec, thr) -> dict[str, bool]:
    fa = {f.name for f in va.fields}
    fb = {f.name for f in vb.fields}
    shared = fa & fb
    union = fa | fb
    b: dict[str, bool] = {}
    b["same_total_fields"] = len(fa) == len(fb)
    b["a_more_fields"] = len(fa) > len(fb)
    b["shared_field_count"] = len(shared) >= thr["shared_field_count"]
    b["shared_any"] = len(shared) > 0
    frac = len(shared) / len(union) if union else 0.0
    b["shared_fraction"] = frac >= thr["shared_fraction"]
    for ch in CHANNELS:
        ea = list(va.encodings.get(ch, ()))
        eb = list(vb.encodings.get(ch, ()))
        common = set(ea) & set(eb)
        b[f"is_equal_count_{ch}"] = len(ea) == len(eb)
        b[f"is_overlapping_{ch}"] = len(common) > 0
        b[f"count_overlapping_{ch}"] = len(common) >= thr[f"count_overlapping_{ch}"]
    b["same_mark"] = va.mark == vb.mark
    return b


def _ref_pc_bits(kind_ab: str, kind_ba: str) -> dict[str, bool]:
    return {
        "has_coordination": kind_ab != "none" or kind_ba != "none",
        "a_filters_b": kind_ab == "filter",
        "b_filters_a": kind_ba == "filter",
        "a_brushes_b": kind_ab == "brush",
        "b_brushes_a": kind_ba == "brush",
    }


def _lit_holds(lit: Literal, merged: dict[str, bool]) -> bool:
    v = merged[lit.feature]
    return (not v) if lit.negated else v


def _rule_uses_coordination(rule: DecisionRule) -> bool:
    return rule.mapping.endswith("_pc") or rule.mapping.startswith("pc_")


@dataclass
class OracleCandidate:
    assignment: dict[str, tuple[int, int, int, int]]
    links: dict[tuple[str, str], str]
    cost: float
    obeyed: float


class OracleScorer:
    """From-scratch rule scoring for one view list and rule set."""

    def __init__(self, ruleset: RuleSet, views: list[ViewSpec]):
        self.thr = ruleset.thresholds
        self.views = views
        self.n = len(views)
        self.rules = list(ruleset.rules)
        self.static_rules = [r for r in self.rules if not _rule_uses_coordination(r)]
        self.coord_rules = [r for r in self.rules if _rule_uses_coordination(r)]
        self._view_bit_cache: dict = {}
        self._pair_layout_cache: dict = {}
        self._pair_data = {}
        for a in range(self.n):
            for b in range(self.n):
                if a != b:
                    self._pair_data[(a, b)] = _ref_pair_data_bits(
                        views[a], views[b], self.thr
                    )
        self._pc_bits = {
            (ka, kb): _ref_pc_bits(ka, kb) for ka in _LINKS for kb in _LINKS
        }

    def view_bits(self, v_idx: int, rect) -> dict[str, bool]:
        key = (v_idx, rect)
        if key not in self._view_bit_cache:
            self._view_bit_cache[key] = _ref_view_bits(
                self.views[v_idx], rect, self.thr
            )
        return self._view_bit_cache[key]

    def pair_layout(self, ra, rb) -> dict[str, bool]:
        key = (ra, rb)
        if key not in self._pair_layout_cache:
            self._pair_layout_cache[key] = _ref_pair_layout_bits(ra, rb, self.thr)
        return self._pair_layout_cache[key]

    def _merged(self, a, b, ra, rb, kab, kba) -> dict[str, bool]:
        merged = dict(self._pair_data[(a, b)])
        merged.update(self.pair_layout(ra, rb))
        merged.update(self._pc_bits[(kab, kba)])
        for name, val in self.view_bits(a, ra).items():
            merged[f"a_{name}"] = val
        for name, val in self.view_bits(b, rb).items():
            merged[f"b_{name}"] = val
        return merged

    def score(
        self,
        assignment: dict[str, tuple[int, int, int, int]],
        links: dict[tuple[str, str], str],
    ) -> tuple[float, float]:
        """(violated importance, obeyed importance) over every rule/subject."""
        rect_of = [assignment[v.id] for v in self.views]
        cost = 0.0
        obey = 0.0
        for rule in self.rules:
            if rule.mapping == "sde_to_sa":
                for i in range(self.n):
                    bits = self.view_bits(i, rect_of[i])
                    if all(_lit_holds(l, bits) for l in rule.condition):
                        if _lit_holds(rule.target, bits):
                            obey += rule.importance
                        else:
                            cost += rule.importance
            else:
                for a in range(self.n):
                    for b in range(self.n):
                        if a == b:
                            continue
                        kab = links.get((self.views[a].id, self.views[b].id), "none")
                        kba = links.get((self.views[b].id, self.views[a].id), "none")
                        merged = self._merged(a, b, rect_of[a], rect_of[b], kab, kba)
                        if all(_lit_holds(l, merged) for l in rule.condition):
                            if _lit_holds(rule.target, merged):
                                obey += rule.importance
                            else:
                                cost += rule.importance
        return cost, obey

    # -- decomposed scoring used by the exhaustive search --------------------

    def static_scores(self, rect_of: list) -> tuple[float, float]:
        cost = 0.0
        obey = 0.0
        for rule in self.static_rules:
            if rule.mapping == "sde_to_sa":
                for i in range(self.n):
                    bits = self.view_bits(i, rect_of[i])
                    if all(_lit_holds(l, bits) for l in rule.condition):
                        if _lit_holds(rule.target, bits):
                            obey += rule.importance
                        else:
                            cost += rule.importance
            else:
                for a in range(self.n):
                    for b in range(self.n):
                        if a == b:
                            continue
                        merged = self._merged(
                            a, b, rect_of[a], rect_of[b], "none", "none"
                        )
                        if all(_lit_holds(l, merged) for l in rule.condition):
                            if _lit_holds(rule.target, merged):
                                obey += rule.importance
                            else:
                                cost += rule.importance
        return cost, obey

    def pair_state_scores(
        self, a: int, b: int, ra, rb
    ) -> dict[tuple[str, str], tuple[float, float]]:
        """Coordination-rule scores of ordered subject (a, b) per link state."""
        out = {}
        for kab, kba in _STATES:
            merged = self._merged(a, b, ra, rb, kab, kba)
            cost = 0.0
            obey = 0.0
            for rule in self.coord_rules:
                if all(_lit_holds(l, merged) for l in rule.condition):
                    if _lit_holds(rule.target, merged):
                        obey += rule.importance
                    else:
                        cost += rule.importance
            out[(kab, kba)] = (cost, obey)
        return out


def _arrangements(views: list[ViewSpec]):
    """Canonical stream of (tiling_idx, perm_idx, assignment) triples."""
    tilings = brute_force_tilings(len(views))
    for t_idx, tiling in enumerate(tilings):
        for p_idx, perm in enumerate(itertools.permutations(range(len(views)))):
            assignment = {views[perm[i]].id: tiling[i] for i in range(len(views))}
            yield t_idx, p_idx, assignment


def exhaustive_recommend(views: list[ViewSpec], ruleset: RuleSet) -> OracleCandidate:
    """Exact argmin of full cost over every arrangement and coordination.

    Coordination is optimized per unordered pair, which is exact because
    every rule's features live on a single ordered pair; the truly joint
    search over all 9^P link states is joint_coordination_bruteforce.
    Ranking: ascending cost, then descending obeyed importance, then
    canonical (tiling, permutation) order.
    """
    if len(views) > 4:
        raise ValueError("exhaustive_recommend is bounded to 4 views")
    scorer = OracleScorer(ruleset, views)
    best = None
    best_key = None
    for t_idx, p_idx, assignment in _arrangements(views):
        rect_of = [assignment[v.id] for v in views]
        cost_s, obey_s = scorer.static_scores(rect_of)
        links: dict[tuple[str, str], str] = {}
        cost_c = 0.0
        obey_c = 0.0
        for a in range(len(views)):
            for b in range(a + 1, len(views)):
                tab_ab = scorer.pair_state_scores(a, b, rect_of[a], rect_of[b])
                tab_ba = scorer.pair_state_scores(b, a, rect_of[b], rect_of[a])
                choices = []
                for s_idx, (kab, kba) in enumerate(_STATES):
                    c = tab_ab[(kab, kba)][0] + tab_ba[(kba, kab)][0]
                    n_links = (kab != "none") + (kba != "none")
                    choices.append((c, n_links, s_idx))
                c, _, s_idx = min(choices)
                kab, kba = _STATES[s_idx]
                links[(views[a].id, views[b].id)] = kab
                links[(views[b].id, views[a].id)] = kba
                cost_c += c
                obey_c += tab_ab[(kab, kba)][1] + tab_ba[(kba, kab)][1]
        total = cost_s + cost_c
        key = (total, -(obey_s + obey_c), t_idx, p_idx)
        if best_key is None or key < best_key:
            best_key = key
            best = OracleCandidate(
                assignment=assignment,
                links=links,
                cost=total,
                obeyed=obey_s + obey_c,
            )
    return best


def joint_coordination_bruteforce(
    views: list[ViewSpec],
    assignment: dict[str, tuple[int, int, int, int]],
    ruleset: RuleSet,
) -> tuple[dict[tuple[str, str], str], float]:
    """Exact joint search over all 9^P coordination combinations.

    Ties prefer fewer links, then the canonical per-pair state order.
    """
    n = len(views)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    if len(pairs) > 6:
        raise ValueError("joint brute force is bounded to 6 unordered pairs")
    scorer = OracleScorer(ruleset, views)
    rect_of = [assignment[v.id] for v in views]
    static_cost, _ = scorer.static_scores(rect_of)

    best = None
    best_key = None
    for combo in itertools.product(range(9), repeat=len(pairs)):
        links: dict[tuple[str, str], str] = {}
        n_links = 0
        for (a, b), s_idx in zip(pairs, combo):
            kab, kba = _STATES[s_idx]
            links[(views[a].id, views[b].id)] = kab
            links[(views[b].id, views[a].id)] = kba
            n_links += (kab != "none") + (kba != "none")
        cost, _ = scorer.score(assignment, links)
        key = (cost, n_links, combo)
        if best_key is None or key < best_key:
            best_key = key
            best = (links, cost)
    assert best is not None
    return best
