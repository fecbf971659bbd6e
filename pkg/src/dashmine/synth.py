"""Synthetic dashboard corpus generator with planted design rules.

Dashboards are sampled from realistic marginal distributions (view counts,
marks, fields, encodings, coordination density), then nudged so that every
planted rule's target literal holds with a controlled probability whenever
its condition fires.  A ground-truth ledger records which rules fired where
and the realized obedience rates.

Numeric features referenced by planted literals use anchored raw values: a
literal is made true/false by pushing the raw value to a band that stays on
the intended side of the corpus mean (verified after generation), so the
planted pattern survives mean-threshold binarization.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from dashmine.corpus import (
    CHANNELS,
    GRID_N,
    Coordination,
    DashboardSpec,
    DataField,
    ViewSpec,
)
from dashmine.mining import Literal
from dashmine.oracle import brute_force_tilings

CANVAS = (1920.0, 1080.0)
_CELL_W = CANVAS[0] / GRID_N
_CELL_H = CANVAS[1] / GRID_N

# lo/hi anchor band per numeric feature usable in planted literals: enforced
# raw values sit at <= lo (bit false) or >= hi (bit true), and the realized
# corpus mean must land in (lo, hi].
ANCHORS: dict[str, tuple[float, float]] = {
    "n_fields_y": (0.0, 1.0),
    "gy": (0.0, 2.0),
    "gh": (1.0, 3.0),
    "gw": (2.0, 3.0),
    "grid_area": (4.0, 8.0),
    "aspect": (1.0, 3.0),
}

# Sampling priors sit above the Fig-3A-style targets for view-heavy
# dashboards because constraint rejections thin those out disproportionately.
VIEW_COUNT_DIST = {2: 0.28, 3: 0.27, 4: 0.16, 5: 0.11, 6: 0.09, 7: 0.05, 8: 0.04}
MARK_DIST = {
    "bar": 0.22,
    "line": 0.13,
    "circle": 0.10,
    "text": 0.10,
    "map": 0.08,
    "area": 0.06,
    "text_table": 0.06,
    "heatmap": 0.06,
    "pie": 0.05,
    "square": 0.04,
    "shape": 0.04,
    "gantt": 0.03,
    "polygon": 0.03,
}
DTYPE_DIST = {"numerical": 0.45, "nominal": 0.35, "ordinal": 0.20}
OP_DIST = {"none": 0.35, "count": 0.15, "sum": 0.20, "avg": 0.15, "min": 0.07,
           "max": 0.08}
FIELD_COUNT_DIST = {1: 0.15, 2: 0.30, 3: 0.30, 4: 0.15, 5: 0.10}
CHANNEL_COUNT_DIST = {
    "x": {0: 0.15, 1: 0.70, 2: 0.15},
    "y": {0: 0.30, 1: 0.60, 2: 0.10},
    "color": {0: 0.45, 1: 0.55},
    "size": {0: 0.80, 1: 0.20},
    "shape": {0: 0.90, 1: 0.10},
}
P_PAIR_LINKED = 0.45
P_TWO_WAY = 0.30
KIND_DIST = {"filter": 0.8, "brush": 0.2}

_LINKS = ("none", "filter", "brush")
_PAIR_COMBOS = tuple(itertools.product(_LINKS, _LINKS))


class UnsatisfiableRules(ValueError):
    """Planted rules could not be realized by constructive sampling."""


@dataclass(frozen=True)
class PlantedRule:
    mapping: str
    condition: tuple[Literal, ...]
    target: Literal
    p_obey: float = 0.9

    def __post_init__(self) -> None:
        if not 0.5 < self.p_obey <= 1.0:
            raise ValueError("p_obey must be in (0.5, 1]")

    def label(self) -> str:
        cond = " and ".join(
            f"{'not ' if l.negated else ''}{l.feature}" for l in self.condition
        )
        tgt = f"{'not ' if self.target.negated else ''}{self.target.feature}"
        return f"{self.mapping}: {cond} => {tgt}"

    def to_dict(self) -> dict:
        return {
            "mapping": self.mapping,
            "condition": [l.to_dict() for l in self.condition],
            "target": self.target.to_dict(),
            "p_obey": self.p_obey,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "PlantedRule":
        return cls(
            mapping=raw["mapping"],
            condition=tuple(Literal.from_dict(c) for c in raw["condition"]),
            target=Literal.from_dict(raw["target"]),
            p_obey=float(raw.get("p_obey", 0.9)),
        )


DEFAULT_PLANTED: tuple[PlantedRule, ...] = (
    PlantedRule("sde_to_sa",
                (Literal("mark=text"), Literal("n_fields_y", True)),
                Literal("gy", True)),
    PlantedRule("sde_to_sa", (Literal("mark=map"),), Literal("grid_area")),
    PlantedRule("sde_to_sa", (Literal("mark=text_table"),), Literal("gh")),
    PlantedRule("sde_to_pa",
                (Literal("a_mark=bar"), Literal("b_mark=bar")),
                Literal("same_height")),
    PlantedRule("pde_to_pa",
                (Literal("same_mark"), Literal("is_equal_count_y")),
                Literal("same_width")),
    PlantedRule("pde_to_pc",
                (Literal("is_overlapping_x"), Literal("is_overlapping_color")),
                Literal("a_brushes_b")),
    PlantedRule("pde_to_pc",
                (Literal("a_more_fields"), Literal("is_overlapping_color", True)),
                Literal("a_filters_b")),
    PlantedRule("pa_to_pc",
                (Literal("is_neighbour"), Literal("same_height")),
                Literal("has_coordination")),
    PlantedRule("pc_to_sa", (Literal("a_filters_b"),), Literal("a_grid_area", True)),
    PlantedRule("sa_to_pc",
                (Literal("a_gh", True), Literal("b_gh", True)),
                Literal("has_coordination")),
)


# ---------------------------------------------------------------------------
# Raw-value probes with anchored semantics


def _choice(rng: np.random.Generator, dist: dict):
    keys = list(dist)
    probs = np.array([dist[k] for k in keys], dtype=float)
    return keys[rng.choice(len(keys), p=probs / probs.sum())]


@dataclass
class _DraftView:
    idx: int
    mark: str
    fields: list[DataField]
    encodings: dict[str, list[str]]
    rect: tuple[int, int, int, int] | None = None


@dataclass
class _Draft:
    views: list[_DraftView]
    links: dict[tuple[int, int], str] = field(default_factory=dict)  # directed

    def link(self, a: int, b: int) -> str:
        return self.links.get((a, b), "none")


def _view_value(view: _DraftView, feature: str) -> float | bool:
    if feature.startswith("mark="):
        return view.mark == feature.split("=", 1)[1]
    if feature == "n_fields":
        return len(view.fields)
    if feature.startswith("n_fields_"):
        return len(view.encodings.get(feature[9:], []))
    if feature.startswith("uses_"):
        return len(view.encodings.get(feature[5:], [])) > 0
    if feature.startswith("count_op_"):
        return sum(1 for f in view.fields if f.op == feature[9:])
    if feature.startswith("count_"):
        return sum(1 for f in view.fields if f.dtype == feature[6:])
    rect = view.rect
    if rect is None:
        raise KeyError(f"layout feature {feature!r} needs an arrangement")
    gx, gy, gw, gh = rect
    return {
        "gx": gx, "gy": gy, "gw": gw, "gh": gh,
        "px_x": gx / GRID_N, "px_y": gy / GRID_N,
        "px_w": gw / GRID_N, "px_h": gh / GRID_N,
        "grid_area": gw * gh, "aspect": gw / gh,
        "cx": gx + gw / 2, "cy": gy + gh / 2,
    }[feature]


def _pair_value(draft: _Draft, a: int, b: int, feature: str) -> float | bool:
    va, vb = draft.views[a], draft.views[b]
    fa = {f.name for f in va.fields}
    fb = {f.name for f in vb.fields}
    if feature == "same_total_fields":
        return len(fa) == len(fb)
    if feature == "a_more_fields":
        return len(fa) > len(fb)
    if feature == "shared_field_count":
        return len(fa & fb)
    if feature == "shared_any":
        return bool(fa & fb)
    if feature == "shared_fraction":
        return len(fa & fb) / len(fa | fb) if fa | fb else 0.0
    if feature == "same_mark":
        return va.mark == vb.mark
    for prefix in ("is_equal_count_", "is_overlapping_", "count_overlapping_"):
        if feature.startswith(prefix):
            ch = feature[len(prefix):]
            ea, eb = va.encodings.get(ch, []), vb.encodings.get(ch, [])
            if prefix == "is_equal_count_":
                return len(ea) == len(eb)
            common = set(ea) & set(eb)
            return bool(common) if prefix == "is_overlapping_" else len(common)
    if feature in ("a_filters_b", "a_brushes_b", "b_filters_a", "b_brushes_a",
                   "has_coordination"):
        kab, kba = draft.link(a, b), draft.link(b, a)
        return {
            "a_filters_b": kab == "filter",
            "a_brushes_b": kab == "brush",
            "b_filters_a": kba == "filter",
            "b_brushes_a": kba == "brush",
            "has_coordination": kab != "none" or kba != "none",
        }[feature]
    ra, rb = draft.views[a].rect, draft.views[b].rect
    if ra is None or rb is None:
        raise KeyError(f"layout feature {feature!r} needs an arrangement")
    if feature == "same_width":
        return ra[2] == rb[2]
    if feature == "same_height":
        return ra[3] == rb[3]
    if feature == "same_area":
        return ra[2] * ra[3] == rb[2] * rb[3]
    if feature == "a_larger_area":
        return ra[2] * ra[3] > rb[2] * rb[3]
    if feature == "is_neighbour":
        ax, ay, aw, ah = ra
        bx, by, bw, bh = rb
        v = (ax + aw == bx or bx + bw == ax) and min(ay + ah, by + bh) > max(ay, by)
        h = (ay + ah == by or by + bh == ay) and min(ax + aw, bx + bw) > max(ax, bx)
        return v or h
    raise KeyError(f"feature {feature!r} is not supported for planting")


def _literal_holds(value: float | bool, lit: Literal) -> bool:
    """Generator-side literal semantics with anchored numeric bands.

    Boolean values compare directly.  Numeric values hold positively at or
    above the hi anchor and negatively at or below the lo anchor; values in
    the open band between anchors count as not firing.
    """
    base = lit.feature[2:] if lit.feature[:2] in ("a_", "b_") else lit.feature
    if isinstance(value, (bool, np.bool_)):
        return (not value) if lit.negated else bool(value)
    lo, hi = ANCHORS[base]
    if lit.negated:
        return value <= lo
    return value >= hi


def _subject_value(draft: _Draft, subject, lit: Literal) -> float | bool:
    if isinstance(subject, int):
        return _view_value(draft.views[subject], lit.feature)
    a, b = subject
    if lit.feature.startswith("a_") and not _is_pair_feature(lit.feature):
        return _view_value(draft.views[a], lit.feature[2:])
    if lit.feature.startswith("b_") and not _is_pair_feature(lit.feature):
        return _view_value(draft.views[b], lit.feature[2:])
    return _pair_value(draft, a, b, lit.feature)


_PAIR_FEATURES = {
    "same_total_fields", "a_more_fields", "shared_field_count", "shared_any",
    "shared_fraction", "same_mark", "a_larger_area", "same_width",
    "same_height", "same_area", "center_distance", "rel_angle", "is_neighbour",
    "a_left_of_b", "a_right_of_b", "a_above_b", "a_below_b",
    "a_top_left_of_b", "a_top_right_of_b", "a_bottom_left_of_b",
    "a_bottom_right_of_b", "has_coordination", "a_filters_b", "b_filters_a",
    "a_brushes_b", "b_brushes_a",
} | {
    f"{p}{ch}"
    for p in ("is_equal_count_", "is_overlapping_", "count_overlapping_")
    for ch in CHANNELS
}


def _is_pair_feature(name: str) -> bool:
    return name in _PAIR_FEATURES


def _fires(draft: _Draft, rule: PlantedRule, subject) -> bool:
    return all(
        _literal_holds(_subject_value(draft, subject, lit), lit)
        for lit in rule.condition
    )


def _target_holds(draft: _Draft, rule: PlantedRule, subject) -> bool:
    return _literal_holds(_subject_value(draft, subject, rule.target), rule.target)


# ---------------------------------------------------------------------------
# Constraint helpers


def _rect_predicate(lit: Literal, want: bool):
    """Rect predicate realizing a single-view arrangement literal."""
    base = lit.feature[2:] if lit.feature[:2] == "a_" else lit.feature
    lo, hi = ANCHORS[base]
    getter = {
        "gy": lambda r: r[1],
        "gw": lambda r: r[2],
        "gh": lambda r: r[3],
        "grid_area": lambda r: r[2] * r[3],
        "aspect": lambda r: r[2] / r[3],
    }[base]
    positive = want != lit.negated  # want the raw value on the high side?
    if positive:
        return lambda r: getter(r) >= hi
    return lambda r: getter(r) <= lo


def _pair_rect_predicate(feature: str, want: bool):
    if feature == "same_height":
        return lambda ra, rb: (ra[3] == rb[3]) == want
    if feature == "same_width":
        return lambda ra, rb: (ra[2] == rb[2]) == want
    if feature == "same_area":
        return lambda ra, rb: (ra[2] * ra[3] == rb[2] * rb[3]) == want
    if feature == "is_neighbour":
        def neigh(ra, rb):
            ax, ay, aw, ah = ra
            bx, by, bw, bh = rb
            v = (ax + aw == bx or bx + bw == ax) and min(ay + ah, by + bh) > max(ay, by)
            h = (ay + ah == by or by + bh == ay) and min(ax + aw, bx + bw) > max(ax, bx)
            return (v or h) == want
        return neigh
    raise KeyError(f"pair arrangement feature {feature!r} cannot be planted")


# ---------------------------------------------------------------------------
# Generation


def _sample_views(rng: np.random.Generator, n_views: int) -> list[_DraftView]:
    universe_size = int(rng.integers(3, 9))
    names = [f"f{i}" for i in range(universe_size)]
    dtypes = {n: _choice(rng, DTYPE_DIST) for n in names}
    ops = {n: _choice(rng, OP_DIST) for n in names}
    theme = names[int(rng.integers(universe_size))]

    views = []
    for idx in range(n_views):
        mark = _choice(rng, MARK_DIST)
        n_fields = min(_choice(rng, FIELD_COUNT_DIST), universe_size)
        chosen = list(rng.choice(names, size=n_fields, replace=False))
        if mark != "text" and theme not in chosen and rng.random() < 0.5:
            chosen[int(rng.integers(len(chosen)))] = theme
        fields = [DataField(n, dtypes[n], ops[n]) for n in sorted(chosen)]
        available = [f.name for f in fields]
        encodings: dict[str, list[str]] = {}
        for ch in CHANNELS:
            dist = CHANNEL_COUNT_DIST[ch]
            if ch == "y" and mark == "text":
                dist = {0: 0.7, 1: 0.3}
            want = min(_choice(rng, dist), len(available))
            if ch == "color" and want and theme in available and rng.random() < 0.6:
                encodings[ch] = [theme]
                continue
            if want:
                encodings[ch] = sorted(
                    rng.choice(available, size=want, replace=False).tolist()
                )
            else:
                encodings[ch] = []
        views.append(_DraftView(idx=idx, mark=mark, fields=fields,
                                encodings=encodings))
    return views


def _sample_links(rng: np.random.Generator, n_views: int) -> dict:
    links: dict[tuple[int, int], str] = {}
    # Dense coordination is implausible (and geometrically unworkable for
    # planted layout rules) on view-heavy dashboards; thin it out with size.
    p_linked = min(P_PAIR_LINKED, 1.5 / n_views)
    for a in range(n_views):
        for b in range(a + 1, n_views):
            if rng.random() >= p_linked:
                continue
            two_way = rng.random() < P_TWO_WAY
            first_ab = rng.random() < 0.5
            kinds = [_choice(rng, KIND_DIST) for _ in range(2)]
            if two_way:
                links[(a, b)] = kinds[0]
                links[(b, a)] = kinds[1]
            elif first_ab:
                links[(a, b)] = kinds[0]
            else:
                links[(b, a)] = kinds[0]
    return links


def _coin(rng: np.random.Generator, rule: PlantedRule, noise: float) -> bool:
    return rng.random() < 1.0 - noise * (1.0 - rule.p_obey)


def _solve_links(
    draft: _Draft,
    directed: dict[tuple[int, int], set],
    require_link: dict[tuple[int, int], bool],
) -> bool:
    """Adjust draft.links to satisfy per-direction kind sets and pair flags.

    Prefers keeping the sampled state; forced additions prefer brush so that
    arrangement constraints derived from earlier filter links stay valid.
    """
    n = len(draft.views)
    for a in range(n):
        for b in range(a + 1, n):
            allowed_ab = directed.get((a, b), set(_LINKS))
            allowed_ba = directed.get((b, a), set(_LINKS))
            need = require_link.get((a, b))
            current = (draft.link(a, b), draft.link(b, a))

            def ok(combo):
                kab, kba = combo
                if kab not in allowed_ab or kba not in allowed_ba:
                    return False
                has = kab != "none" or kba != "none"
                if need is True and not has:
                    return False
                if need is False and has:
                    return False
                return True

            if ok(current):
                continue
            ranked = []
            for combo in _PAIR_COMBOS:
                if not ok(combo):
                    continue
                changes = (combo[0] != current[0]) + (combo[1] != current[1])
                filter_added = sum(
                    1
                    for new, old in zip(combo, current)
                    if new == "filter" and old != "filter"
                )
                ranked.append((changes, filter_added, combo))
            if not ranked:
                return False
            _, _, best = min(ranked)
            for key, kind in (((a, b), best[0]), ((b, a), best[1])):
                if kind == "none":
                    draft.links.pop(key, None)
                else:
                    draft.links[key] = kind
    return True


def _match_assignment(
    rng: np.random.Generator,
    tiling,
    n_views: int,
    view_preds: list,
    pair_preds: list,
) -> dict[int, tuple[int, int, int, int]] | None:
    """Assign views to tiling rectangles satisfying all predicates.

    Backtracking over views in most-constrained-first order with randomized
    rectangle order; pairwise predicates prune as soon as both ends are
    placed.
    """
    preds_by_view: dict[int, list] = {}
    for v, pred in view_preds:
        preds_by_view.setdefault(v, []).append(pred)
    compatible = {
        v: [
            i
            for i, rect in enumerate(tiling)
            if all(p(rect) for p in preds_by_view.get(v, ()))
        ]
        for v in range(n_views)
    }
    if any(not c for c in compatible.values()):
        return None
    view_order = sorted(range(n_views), key=lambda v: len(compatible[v]))
    placed: dict[int, int] = {}
    used: set[int] = set()

    def backtrack(pos: int) -> bool:
        if pos == n_views:
            return True
        v = view_order[pos]
        options = [i for i in compatible[v] if i not in used]
        rng.shuffle(options)
        for rect_i in options:
            placed[v] = rect_i
            used.add(rect_i)
            ok = True
            for a, b, pred in pair_preds:
                if a in placed and b in placed:
                    if not pred(tiling[placed[a]], tiling[placed[b]]):
                        ok = False
                        break
            if ok and backtrack(pos + 1):
                return True
            del placed[v]
            used.discard(rect_i)
        return False

    if not backtrack(0):
        return None
    return {v: tiling[i] for v, i in placed.items()}


def _generate_dashboard(
    rng: np.random.Generator,
    planted: tuple[PlantedRule, ...],
    noise: float,
) -> _Draft | None:
    n_views = _choice(rng, VIEW_COUNT_DIST)
    draft = _Draft(views=_sample_views(rng, n_views))
    draft.links = _sample_links(rng, n_views)
    pairs = [(a, b) for a in range(n_views) for b in range(n_views) if a != b]

    data_pc = [r for r in planted
               if r.mapping.endswith("_pc") and r.mapping.startswith(("sde", "pde"))]
    arrangement_rules = [r for r in planted if r.mapping.endswith(("_sa", "_pa"))]
    late_pc = [r for r in planted
               if r.mapping.endswith("_pc") and r.mapping.startswith(("sa", "pa"))]

    # Phase 1: coordination rules conditioned on data only.
    directed: dict[tuple[int, int], set] = {}
    require_link: dict[tuple[int, int], bool] = {}

    def link_atom(lit: Literal, a: int, b: int):
        """Physical link statement a literal talks about, plus the value it
        demands when the literal holds."""
        if lit.feature == "has_coordination":
            return ("pairlink", min(a, b), max(a, b)), not lit.negated
        direction = (a, b) if lit.feature.startswith("a_") else (b, a)
        kind = "filter" if "filter" in lit.feature else "brush"
        return ("link", direction, kind), not lit.negated

    def apply_atom(atom, value: bool, label: str) -> None:
        if atom[0] == "pairlink":
            key = (atom[1], atom[2])
            prev = require_link.get(key)
            if prev is not None and prev != value:
                raise UnsatisfiableRules(label)
            require_link[key] = value
        else:
            _, direction, kind = atom
            allowed = directed.setdefault(direction, set(_LINKS))
            if value:
                allowed.intersection_update({kind})
            else:
                allowed.intersection_update(set(_LINKS) - {kind})
            if not allowed:
                raise UnsatisfiableRules(label)

    def constrain_link_rules(rules) -> None:
        # Rules demanding the same physical atom share one obedience coin,
        # so overlapping conditions with a common target stay satisfiable.
        groups: dict = {}
        for rule in rules:
            for a, b in pairs:
                if _fires(draft, rule, (a, b)):
                    atom, on_obey = link_atom(rule.target, a, b)
                    groups.setdefault(atom, []).append((rule, on_obey))
        for atom, entries in sorted(groups.items(), key=lambda kv: repr(kv[0])):
            wants = {on_obey for _, on_obey in entries}
            rule = entries[0][0]
            if len(wants) > 1:
                raise UnsatisfiableRules(
                    " vs ".join(sorted({r.label() for r, _ in entries}))
                )
            obey = _coin(rng, rule, noise)
            apply_atom(atom, entries[0][1] if obey else not entries[0][1],
                       rule.label())

    try:
        constrain_link_rules(data_pc)
    except UnsatisfiableRules:
        return None
    if not _solve_links(draft, directed, require_link):
        return None

    # Phase 2: arrangement constraints (single-view and pairwise predicates).
    view_preds: list[tuple[int, object]] = []
    pair_preds: list[tuple[int, int, object]] = []
    for rule in arrangement_rules:
        if rule.mapping.endswith("_sa"):
            if rule.mapping == "sde_to_sa":
                for i in range(n_views):
                    if _fires(draft, rule, i):
                        obey = _coin(rng, rule, noise)
                        view_preds.append((i, _rect_predicate(rule.target, obey)))
            else:  # pair-conditioned, targets view A's arrangement
                seen = set()
                for a, b in pairs:
                    if _fires(draft, rule, (a, b)) and a not in seen:
                        seen.add(a)
                        obey = _coin(rng, rule, noise)
                        view_preds.append((a, _rect_predicate(rule.target, obey)))
        else:  # *_to_pa with condition independent of arrangement
            for a, b in pairs:
                if a < b and _fires(draft, rule, (a, b)):
                    obey = _coin(rng, rule, noise)
                    want = obey != rule.target.negated
                    pair_preds.append(
                        (a, b, _pair_rect_predicate(rule.target.feature, want))
                    )

    tilings = brute_force_tilings(n_views)
    assignment = None
    order = rng.permutation(len(tilings))
    for t_i in order[: min(len(order), 200)]:
        assignment = _match_assignment(rng, tilings[t_i], n_views, view_preds,
                                        pair_preds)
        if assignment is not None:
            break
    if assignment is None:
        return None
    for i, view in enumerate(draft.views):
        view.rect = assignment[i]

    # Phase 3: coordination rules conditioned on the arrangement.  Phase-1
    # constraints stay in force (constraint dicts are cumulative), so the
    # re-solve cannot undo an enforced data-conditioned outcome.
    try:
        constrain_link_rules(late_pc)
    except UnsatisfiableRules:
        return None
    if not _solve_links(draft, directed, require_link):
        return None
    return draft


def _draft_to_spec(draft: _Draft, dash_id: str) -> DashboardSpec:
    views = []
    for dv in draft.views:
        gx, gy, gw, gh = dv.rect
        views.append(
            ViewSpec(
                id=f"v{dv.idx}",
                mark=dv.mark,
                fields=tuple(dv.fields),
                encodings={ch: tuple(dv.encodings.get(ch, [])) for ch in CHANNELS},
                layout_px=(gx * _CELL_W, gy * _CELL_H, gw * _CELL_W, gh * _CELL_H),
            )
        )
    coords = [
        Coordination(source=f"v{a}", target=f"v{b}", kind=kind)
        for (a, b), kind in sorted(draft.links.items())
    ]
    return DashboardSpec(
        id=dash_id, canvas_px=CANVAS, views=tuple(views),
        coordinations=tuple(coords),
    )


def generate_corpus(
    planted: tuple[PlantedRule, ...] = DEFAULT_PLANTED,
    count: int = 100,
    noise: float = 1.0,
    seed: int = 0,
) -> tuple[list[DashboardSpec], dict]:
    """Sample `count` dashboards with the planted rules in force.

    `noise` scales disobedience: conditioned on a rule firing, its target
    holds with probability 1 - noise * (1 - p_obey); noise 0 plants perfect
    rules, noise 1 realizes each rule's own p_obey.

    Returns (dashboards, ledger).  The ledger records per-rule fired/obeyed
    counts, per-dashboard firing subjects, sampling stats, and anchor checks.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if not 0.0 <= noise <= 1.0:
        raise ValueError("noise must be in [0, 1]")
    rng = np.random.default_rng(seed)

    dashboards: list[DashboardSpec] = []
    drafts: list[_Draft] = []
    failures = 0
    for i in range(count):
        draft = None
        for _ in range(60):
            draft = _generate_dashboard(rng, planted, noise)
            if draft is not None:
                break
            failures += 1
        if draft is None:
            raise UnsatisfiableRules(
                "could not realize the planted rules after bounded rejection "
                f"sampling (dashboard {i}); check for conflicting rules: "
                + "; ".join(r.label() for r in planted)
            )
        drafts.append(draft)
        dashboards.append(_draft_to_spec(draft, f"dash{i:04d}"))

    ledger = _build_ledger(planted, drafts, dashboards, noise, seed, failures)
    return dashboards, ledger


def _build_ledger(planted, drafts, dashboards, noise, seed, failures) -> dict:
    rule_stats = [
        {"rule": r.to_dict(), "label": r.label(), "fired": 0, "obeyed": 0}
        for r in planted
    ]
    per_dashboard = []
    for draft, dash in zip(drafts, dashboards):
        n = len(draft.views)
        firings = []
        for r_idx, rule in enumerate(planted):
            subjects = (
                range(n)
                if rule.mapping == "sde_to_sa"
                else [(a, b) for a in range(n) for b in range(n) if a != b]
            )
            for subject in subjects:
                if not _fires(draft, rule, subject):
                    continue
                obeyed = _target_holds(draft, rule, subject)
                rule_stats[r_idx]["fired"] += 1
                rule_stats[r_idx]["obeyed"] += int(obeyed)
                name = (
                    f"v{subject}"
                    if isinstance(subject, int)
                    else f"v{subject[0]}|v{subject[1]}"
                )
                firings.append({"rule": r_idx, "subject": name, "obeyed": obeyed})
        per_dashboard.append({"id": dash.id, "firings": firings})

    for entry in rule_stats:
        fired = entry["fired"]
        entry["obedience"] = entry["obeyed"] / fired if fired else None

    view_count: dict[str, int] = {}
    marks: dict[str, int] = {}
    coord = {"none": 0, "filter": 0, "brush": 0}
    for dash in dashboards:
        v = len(dash.views)
        view_count[str(v)] = view_count.get(str(v), 0) + 1
        for view in dash.views:
            marks[view.mark] = marks.get(view.mark, 0) + 1
        linked = set()
        for c in dash.coordinations:
            coord[c.kind] += 1
            linked.add(frozenset((c.source, c.target)))
        coord["none"] += v * (v - 1) // 2 - len(linked)

    anchor_checks = _verify_anchors(planted, drafts)
    return {
        "seed": seed,
        "count": len(dashboards),
        "noise": noise,
        "rejected_drafts": failures,
        "rules": rule_stats,
        "stats": {"view_count": view_count, "marks": marks, "coordination": coord},
        "anchor_checks": anchor_checks,
        "dashboards": per_dashboard,
    }


def _verify_anchors(planted, drafts) -> list[dict]:
    """Realized corpus means of anchored features used by planted literals."""
    used: set[str] = set()
    for rule in planted:
        for lit in list(rule.condition) + [rule.target]:
            base = lit.feature[2:] if lit.feature[:2] in ("a_", "b_") else lit.feature
            if base in ANCHORS:
                used.add(base)
    checks = []
    for feature in sorted(used):
        lo, hi = ANCHORS[feature]
        values = []
        for draft in drafts:
            for view in draft.views:
                values.append(float(_view_value(view, feature)))
        mean = float(np.mean(values))
        checks.append(
            {
                "feature": feature,
                "mean": mean,
                "lo": lo,
                "hi": hi,
                "ok": lo < mean <= hi,
            }
        )
    return checks


def ledger_to_json(ledger: dict) -> str:
    return json.dumps(ledger, indent=2) + "\n"
