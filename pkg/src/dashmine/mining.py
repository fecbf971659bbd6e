"""Design-rule mining: ten feature mappings, per-target rule models, selection.

For every mapping (condition group -> target group) and every binarized
target feature we fit an L1-penalized logistic model over all rule
candidates (single literals and two-literal conjunctions of condition
bits).  Surviving coefficients become decision rules; a negative
coefficient is recorded as a positive-coefficient rule for the negated
target, so every retained rule reads "condition => target literal".  Each
model keeps its top rules by importance |coef| * sqrt(support*(1-support)).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from dashmine.corpus import DashboardSpec, dashboard_to_dict, corpus_digest
from dashmine.features import (
    REGISTRY,
    FeatureRegistry,
    binarize,
    extract_pairwise,
    extract_single_view,
    single_view_features_px,
)
from dashmine.sparselogit import (
    candidate_column,
    fit_l1_logistic_path,
    lambda_grid,
    null_gradient,
    _sigmoid,
    weighted_log_loss,
)

N_CV_FOLDS = 5
N_LAMBDAS = 20
LAMBDA_RATIO = 0.2
DEFAULT_TOP_RULES = 3
DEFAULT_MAX_CONDITIONS = 2


# ---------------------------------------------------------------------------
# Mappings


@dataclass(frozen=True)
class Mapping:
    id: str
    condition_groups: tuple[str, ...]
    target_group: str
    subject: str  # "view" | "pair"

    def __post_init__(self) -> None:
        if set(self.condition_groups) & {self.target_group}:
            raise ValueError(f"mapping {self.id}: condition and target groups overlap")


MAPPINGS: tuple[Mapping, ...] = (
    Mapping("sde_to_sa", ("sde",), "sa", "view"),
    Mapping("sde_to_pa", ("sde",), "pa", "pair"),
    Mapping("sde_to_pc", ("sde",), "pc", "pair"),
    Mapping("pde_to_sa", ("pde",), "sa", "pair"),
    Mapping("pde_to_pa", ("pde",), "pa", "pair"),
    Mapping("pde_to_pc", ("pde",), "pc", "pair"),
    Mapping("sa_to_pc", ("sa",), "pc", "pair"),
    Mapping("pa_to_pc", ("pa",), "pc", "pair"),
    Mapping("pc_to_sa", ("pc",), "sa", "pair"),
    Mapping("pc_to_pa", ("pc",), "pa", "pair"),
)

MAPPING_BY_ID = {m.id: m for m in MAPPINGS}
S2S_MAPPING = "sde_to_sa"


def mapping_condition_bits(
    mapping: Mapping, registry: FeatureRegistry = REGISTRY
) -> tuple[str, ...]:
    """Condition bit names for a mapping, in stable registry order.

    On pair subjects, single-view groups contribute both views' bits with
    `a_` / `b_` prefixes; pairwise groups contribute their bits unprefixed.
    """
    names: list[str] = []
    for group in mapping.condition_groups:
        bits = registry.bits_for_group(group)
        if mapping.subject == "pair" and group in ("sde", "sa"):
            names.extend(f"a_{b}" for b in bits)
            names.extend(f"b_{b}" for b in bits)
        else:
            names.extend(bits)
    return tuple(names)


def mapping_target_bits(
    mapping: Mapping, registry: FeatureRegistry = REGISTRY
) -> tuple[str, ...]:
    """Target bit names; single-view targets on pair subjects are view A's."""
    bits = registry.bits_for_group(mapping.target_group)
    if mapping.subject == "pair" and mapping.target_group == "sa":
        return tuple(f"a_{b}" for b in bits)
    return bits


# ---------------------------------------------------------------------------
# Rules


@dataclass(frozen=True)
class Literal:
    feature: str
    negated: bool = False

    def holds(self, bits) -> bool:
        value = bool(bits[self.feature])
        return not value if self.negated else value

    def to_dict(self) -> dict:
        return {"feature": self.feature, "negated": self.negated}

    @classmethod
    def from_dict(cls, raw: dict) -> "Literal":
        return cls(feature=raw["feature"], negated=bool(raw["negated"]))


@dataclass(frozen=True)
class DecisionRule:
    mapping: str
    condition: tuple[Literal, ...]
    target: Literal
    coefficient: float
    importance: float
    support: float
    train_acc: float
    test_acc: float

    def __post_init__(self) -> None:
        if not 1 <= len(self.condition) <= DEFAULT_MAX_CONDITIONS:
            raise ValueError("rule condition must have 1 or 2 literals")
        if self.importance < 0:
            raise ValueError("rule importance must be non-negative")

    def fires(self, bits) -> bool:
        return all(lit.holds(bits) for lit in self.condition)

    def to_dict(self) -> dict:
        return {
            "mapping": self.mapping,
            "condition": [lit.to_dict() for lit in self.condition],
            "target": self.target.to_dict(),
            "coefficient": self.coefficient,
            "importance": self.importance,
            "support": self.support,
            "train_acc": self.train_acc,
            "test_acc": self.test_acc,
        }

    @classmethod
    def from_dict(cls, raw: dict) -> "DecisionRule":
        return cls(
            mapping=raw["mapping"],
            condition=tuple(Literal.from_dict(c) for c in raw["condition"]),
            target=Literal.from_dict(raw["target"]),
            coefficient=float(raw["coefficient"]),
            importance=float(raw["importance"]),
            support=float(raw["support"]),
            train_acc=float(raw["train_acc"]),
            test_acc=float(raw["test_acc"]),
        )


@dataclass
class RuleSet:
    rules: list[DecisionRule]
    thresholds: dict[str, float]
    provenance: dict = field(default_factory=dict)

    def by_mapping(self, mapping_id: str) -> list[DecisionRule]:
        return [r for r in self.rules if r.mapping == mapping_id]

    def to_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "thresholds": {k: self.thresholds[k] for k in sorted(self.thresholds)},
            "rules": [r.to_dict() for r in self.rules],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, raw: dict) -> "RuleSet":
        return cls(
            rules=[DecisionRule.from_dict(r) for r in raw["rules"]],
            thresholds={k: float(v) for k, v in raw["thresholds"].items()},
            provenance=raw.get("provenance", {}),
        )

    @classmethod
    def from_json(cls, text: str) -> "RuleSet":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Corpus split and subject assembly


def split_corpus(
    corpus: Sequence[DashboardSpec], train_frac: float = 0.75, seed: int = 0
) -> tuple[list[DashboardSpec], list[DashboardSpec]]:
    """Deterministic shuffled split at dashboard granularity (train size floors)."""
    if not 0.0 < train_frac < 1.0:
        raise ValueError("train_frac must be in (0, 1)")
    if len(corpus) < 4:
        raise ValueError("corpus must have at least 4 dashboards to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    n_train = int(len(corpus) * train_frac)
    train = [corpus[i] for i in order[:n_train]]
    test = [corpus[i] for i in order[n_train:]]
    return train, test


def _dashboard_fold(dash: DashboardSpec, n_folds: int = N_CV_FOLDS) -> int:
    # Content-keyed folds make CV (hence the mined rules) invariant under
    # corpus duplication: copies of a dashboard always share a fold.
    blob = json.dumps(dashboard_to_dict(dash), sort_keys=True).encode()
    return int.from_bytes(hashlib.sha256(blob).digest()[:4], "big") % n_folds


@dataclass
class SubjectTable:
    """Binarized per-subject bit rows for one subject kind.

    Pair rows concatenate view A bits (`a_` prefix), view B bits (`b_`
    prefix), and the pairwise bits.
    """

    kind: str
    subjects: list
    dashboards: np.ndarray  # dashboard index per subject
    folds: np.ndarray
    bits: np.ndarray  # (n_subjects, n_bits) float32 in {0, 1}
    bit_names: tuple[str, ...]
    col_of: dict[str, int]

    def columns(self, names: Sequence[str]) -> np.ndarray:
        return self.bits[:, [self.col_of[n] for n in names]]


@dataclass
class BinarizedCorpus:
    thresholds: dict[str, float]
    warnings: list[str]
    views: SubjectTable
    pairs: SubjectTable


def binarized_features(
    corpus: Sequence[DashboardSpec],
    thresholds: dict[str, float] | None = None,
    registry: FeatureRegistry = REGISTRY,
) -> BinarizedCorpus:
    """Extract and binarize every view and ordered view pair in the corpus."""
    from dashmine.corpus import normalize_to_grid

    single_raw = []
    pair_raw = []
    view_meta = []  # (dash_idx, view_id)
    pair_meta = []  # (dash_idx, (id_a, id_b))
    for d_idx, dash in enumerate(corpus):
        grid = normalize_to_grid(dash)
        for view in dash.views:
            raw = single_view_features_px(
                view, grid[view.id], view.layout_px, dash.canvas_px
            )
            single_raw.append(raw)
            view_meta.append((d_idx, view.id))
        for va in dash.views:
            for vb in dash.views:
                if va.id == vb.id:
                    continue
                pair_raw.append(
                    extract_pairwise(
                        va, vb, grid[va.id], grid[vb.id], dash.coordinations
                    )
                )
                pair_meta.append((d_idx, (va.id, vb.id)))

    single_vecs, single_thr, warn_s = binarize(single_raw, registry, thresholds)
    pair_vecs, pair_thr, warn_p = binarize(pair_raw, registry, thresholds)
    thresholds_out = dict(single_thr)
    thresholds_out.update(pair_thr)

    single_bit_names = registry.bit_names("single")
    pair_bit_names = registry.bit_names("pair")

    view_rows = np.asarray(
        [[v.bits[b] for b in single_bit_names] for v in single_vecs],
        dtype=np.float32,
    )
    folds = np.asarray([_dashboard_fold(d) for d in corpus], dtype=np.int64)

    views = SubjectTable(
        kind="single",
        subjects=[m[1] for m in view_meta],
        dashboards=np.asarray([m[0] for m in view_meta]),
        folds=folds[[m[0] for m in view_meta]],
        bits=view_rows,
        bit_names=single_bit_names,
        col_of={n: i for i, n in enumerate(single_bit_names)},
    )

    # Pair rows: a_* bits, b_* bits, then pairwise bits.
    view_row_of = {
        (d_idx, vid): i for i, (d_idx, vid) in enumerate(view_meta)
    }
    pair_names = (
        tuple(f"a_{b}" for b in single_bit_names)
        + tuple(f"b_{b}" for b in single_bit_names)
        + pair_bit_names
    )
    n_pairs = len(pair_vecs)
    pair_rows = np.empty((n_pairs, len(pair_names)), dtype=np.float32)
    ns = len(single_bit_names)
    for i, ((d_idx, (ida, idb)), vec) in enumerate(zip(pair_meta, pair_vecs)):
        pair_rows[i, :ns] = view_rows[view_row_of[(d_idx, ida)]]
        pair_rows[i, ns : 2 * ns] = view_rows[view_row_of[(d_idx, idb)]]
        pair_rows[i, 2 * ns :] = [vec.bits[b] for b in pair_bit_names]

    pairs = SubjectTable(
        kind="pair",
        subjects=[m[1] for m in pair_meta],
        dashboards=np.asarray([m[0] for m in pair_meta]),
        folds=folds[[m[0] for m in pair_meta]],
        bits=pair_rows,
        bit_names=pair_names,
        col_of={n: i for i, n in enumerate(pair_names)},
    )

    return BinarizedCorpus(
        thresholds=thresholds_out,
        warnings=warn_s + warn_p,
        views=views,
        pairs=pairs,
    )


# ---------------------------------------------------------------------------
# Candidate conditions


def generate_candidate_rules(
    condition_bits: Sequence[str], max_conditions: int = DEFAULT_MAX_CONDITIONS
) -> list[tuple[Literal, ...]]:
    """All 1-literal and (optionally) 2-literal conjunction conditions.

    Stable order: positive then negated singles per bit, then for each bit
    pair (i < j) the four polarity combinations.  No tautologies and no
    duplicate feature within one condition.
    """
    if not condition_bits:
        raise ValueError("need at least one condition bit")
    if max_conditions not in (1, 2):
        raise ValueError("max_conditions must be 1 or 2")
    out: list[tuple[Literal, ...]] = []
    for bit in condition_bits:
        out.append((Literal(bit, False),))
        out.append((Literal(bit, True),))
    if max_conditions == 2:
        for a, b in combinations(condition_bits, 2):
            for neg_a in (False, True):
                for neg_b in (False, True):
                    out.append((Literal(a, neg_a), Literal(b, neg_b)))
    return out


def _candidate_arrays(
    n_bits: int, max_conditions: int
) -> tuple[np.ndarray, np.ndarray]:
    """Literal-column indices mirroring generate_candidate_rules order.

    Literal column layout: positive bits occupy columns [0, n), negations
    [n, 2n).  Returns (cand_a, cand_b) with cand_b = -1 for singles.
    """
    a: list[int] = []
    b: list[int] = []
    for i in range(n_bits):
        a.extend((i, i + n_bits))
        b.extend((-1, -1))
    if max_conditions == 2:
        for i, j in combinations(range(n_bits), 2):
            for ai in (i, i + n_bits):
                for bj in (j, j + n_bits):
                    a.append(ai)
                    b.append(bj)
    return np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)


def _literal_matrix(bits: np.ndarray) -> np.ndarray:
    return np.hstack([bits, 1.0 - bits]).astype(np.float32)


# ---------------------------------------------------------------------------
# Model fitting


@dataclass
class ModelFit:
    mapping: str
    target: str
    rules: list[DecisionRule]
    lambda_: float
    threshold: float  # rule-vote decision threshold calibrated on train
    train_acc: float
    test_acc: float
    warnings: list[str]


def _class_weights(y: np.ndarray) -> tuple[float, float]:
    """Inverse-frequency weights (w_neg, w_pos) balancing the two classes."""
    n = y.shape[0]
    n_pos = float(y.sum())
    return n / (2.0 * (n - n_pos)), n / (2.0 * n_pos)


class _MappingDesign:
    """Literal matrices and candidate arrays shared by one mapping's models."""

    def __init__(
        self, cond_matrix: np.ndarray, folds: np.ndarray, max_conditions: int
    ):
        n_bits = cond_matrix.shape[1]
        self.cand_a, self.cand_b = _candidate_arrays(n_bits, max_conditions)
        self.L_full = _literal_matrix(cond_matrix)
        self.folds = folds
        self.fold_ids = sorted(set(folds.tolist()))
        self.fold_fit_L = {f: self.L_full[folds != f] for f in self.fold_ids}
        self.fold_val_L = {f: self.L_full[folds == f] for f in self.fold_ids}


def _rule_scores(
    conditions: Sequence[tuple[Literal, ...]],
    signs: np.ndarray,
    coefs: np.ndarray,
    table_bits: np.ndarray,
    col_of: dict[str, int],
) -> np.ndarray:
    """Signed vote of a rule list on every row of a bit matrix."""
    total = np.zeros(table_bits.shape[0])
    for cond, sign, coef in zip(conditions, signs, coefs):
        fired = np.ones(table_bits.shape[0], dtype=bool)
        for lit in cond:
            col = table_bits[:, col_of[lit.feature]] > 0.5
            fired &= ~col if lit.negated else col
        total += np.where(fired, sign * coef, 0.0)
    return total


def calibrate_threshold(score: np.ndarray, y: np.ndarray) -> float:
    """Decision threshold (predict true iff score > t) maximizing accuracy.

    Candidates are the observed scores; ties prefer the largest threshold,
    so an empty rule set degrades to the majority-class predictor exactly.
    """
    y = y.astype(bool)
    taus = np.unique(score)
    best_t = float(taus[-1])  # predict everything negative
    best_acc = float((~y).mean())
    # predicting true on score > t for t just below each observed value
    order = np.argsort(-score, kind="stable")
    sorted_scores = score[order]
    sorted_y = y[order]
    cum_pos = np.cumsum(sorted_y)
    n = y.shape[0]
    total_pos = cum_pos[-1] if n else 0
    for i in range(n - 1, -1, -1):
        # threshold just below sorted_scores[i]: rows 0..i predicted true
        if i + 1 < n and sorted_scores[i + 1] == sorted_scores[i]:
            continue
        acc = (cum_pos[i] + ((n - i - 1) - (total_pos - cum_pos[i]))) / n
        if acc > best_acc + 1e-12:
            best_acc = acc
            best_t = float(np.nextafter(sorted_scores[i], -np.inf))
    return best_t


def rule_scores(
    rules: Sequence[DecisionRule],
    bits: np.ndarray,
    col_of: dict[str, int],
) -> np.ndarray:
    signs = np.asarray([-1.0 if r.target.negated else 1.0 for r in rules])
    coefs = np.asarray([r.coefficient for r in rules])
    return _rule_scores([r.condition for r in rules], signs, coefs, bits, col_of)


def predict_with_rules(
    rules: Sequence[DecisionRule],
    bits: np.ndarray,
    col_of: dict[str, int],
    target: str,
    threshold: float,
) -> np.ndarray:
    """Rule-vote prediction of a target bit.

    Each fired rule votes its coefficient toward its target literal; the
    subject is predicted positive when the vote exceeds the model's
    calibrated threshold.
    """
    return rule_scores(rules, bits, col_of) > threshold


def fit_rule_model(
    train_bits: np.ndarray,
    cond_names: Sequence[str],
    y: np.ndarray,
    folds: np.ndarray,
    mapping_id: str,
    target_name: str,
    *,
    top_rules: int = DEFAULT_TOP_RULES,
    max_conditions: int = DEFAULT_MAX_CONDITIONS,
    n_lambdas: int = N_LAMBDAS,
    lambda_ratio: float = LAMBDA_RATIO,
    design: _MappingDesign | None = None,
) -> ModelFit:
    """Fit one (mapping, target) rule model on binarized training subjects.

    `train_bits` holds only the condition bit columns (order = cond_names);
    `y` is the target bit; `folds` assigns each subject to a CV fold.
    """
    y = np.asarray(y, dtype=np.float64)
    if y.min() == y.max():
        raise ValueError(f"target {target_name!r} is constant on training data")

    warnings: list[str] = []
    if design is None:
        design = _MappingDesign(train_bits, folds, max_conditions)
    cand_a, cand_b = design.cand_a, design.cand_b
    conditions = generate_candidate_rules(cond_names, max_conditions)
    w_neg, w_pos = _class_weights(y)
    w_full = np.where(y > 0.5, w_pos, w_neg)

    g0 = null_gradient(design.L_full, cand_a, cand_b, y, w_full)
    lam_max = float(np.abs(g0).max())
    if lam_max <= 0:
        raise ValueError(f"target {target_name!r} has no varying candidate")
    lambdas = lambda_grid(lam_max, n_lambdas, lambda_ratio)

    # Cross-validated log-loss per lambda.
    cv_loss = np.zeros(n_lambdas)
    cv_folds_used = 0
    for f in design.fold_ids:
        fit_mask = folds != f
        y_fit = y[fit_mask]
        if not fit_mask.any() or y_fit.min() == y_fit.max() or not (~fit_mask).any():
            warnings.append(
                f"fold {f}: constant target or empty validation; fold skipped"
            )
            continue
        w_fit = np.where(y_fit > 0.5, w_pos, w_neg)
        path = fit_l1_logistic_path(
            design.fold_fit_L[f], cand_a, cand_b, y_fit, w_fit, lambdas,
            tol=1e-4,
        )
        lit_val = design.fold_val_L[f]
        y_val = y[~fit_mask]
        w_val = np.ones_like(y_val)  # selection by plain held-out log-loss
        for li in range(n_lambdas):
            eta = np.full(lit_val.shape[0], path.intercepts[li])
            for j, beta in path.coefs[li].items():
                eta += beta * candidate_column(lit_val, cand_a[j], cand_b[j])
            cv_loss[li] += weighted_log_loss(y_val, _sigmoid(eta), w_val)
        cv_folds_used += 1

    if cv_folds_used == 0:
        best_idx = 0
        warnings.append("no usable CV fold; defaulting to the sparsest lambda")
    else:
        cv_loss /= cv_folds_used
        best_idx = int(np.argmin(cv_loss))  # ties resolve to the larger lambda

    path = fit_l1_logistic_path(
        design.L_full, cand_a, cand_b, y, w_full, lambdas, tol=1e-5
    )
    if not path.converged[best_idx]:
        warnings.append(
            f"model {mapping_id}/{target_name}: coordinate descent did not fully "
            "converge at the selected lambda; using best iterate"
        )
    coefs = path.coefs[best_idx]

    # Convert coefficients to rules; negative coefficients flip the target.
    entries = []
    for j, beta in coefs.items():
        colv = candidate_column(design.L_full, cand_a[j], cand_b[j])
        s = float(colv.mean())  # unweighted firing fraction on train subjects
        importance = abs(beta) * float(np.sqrt(s * (1.0 - s)))
        if importance > 0.0:
            entries.append((j, beta, s, importance))
    entries.sort(key=lambda e: (-e[3], e[0]))
    kept = entries[:top_rules]

    # Calibrated rule-vote threshold and training accuracy of kept rules.
    signs = np.asarray([1.0 if beta > 0 else -1.0 for _, beta, _, _ in kept])
    coef_arr = np.asarray([abs(beta) for _, beta, _, _ in kept])
    col_of = {n: i for i, n in enumerate(cond_names)}
    score = _rule_scores([conditions[j] for j, *_ in kept], signs, coef_arr,
                         train_bits, col_of)
    threshold = calibrate_threshold(score, y)
    pred = score > threshold
    train_acc = float((pred == (y > 0.5)).mean())

    rules = [
        DecisionRule(
            mapping=mapping_id,
            condition=conditions[j],
            target=Literal(target_name, negated=beta < 0),
            coefficient=abs(float(beta)),
            importance=imp,
            support=s,
            train_acc=train_acc,
            test_acc=float("nan"),
        )
        for j, beta, s, imp in kept
    ]
    return ModelFit(
        mapping=mapping_id,
        target=target_name,
        rules=rules,
        lambda_=float(lambdas[best_idx]),
        threshold=threshold,
        train_acc=train_acc,
        test_acc=float("nan"),
        warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Mining orchestration


def _mapping_table(binz: BinarizedCorpus, mapping: Mapping) -> SubjectTable:
    return binz.views if mapping.subject == "view" else binz.pairs


def mine_all(
    corpus: Sequence[DashboardSpec],
    seed: int = 0,
    *,
    train_frac: float = 0.75,
    top_rules: int = DEFAULT_TOP_RULES,
    max_conditions: int = DEFAULT_MAX_CONDITIONS,
    mappings: Sequence[Mapping] = MAPPINGS,
    n_lambdas: int = N_LAMBDAS,
    lambda_ratio: float = LAMBDA_RATIO,
    threads: int = 1,
) -> RuleSet:
    """Run the full mining pipeline: split, binarize, fit every model."""
    train, test = split_corpus(corpus, train_frac=train_frac, seed=seed)
    return mine_from_split(
        train,
        test,
        seed=seed,
        train_frac=train_frac,
        top_rules=top_rules,
        max_conditions=max_conditions,
        mappings=mappings,
        n_lambdas=n_lambdas,
        lambda_ratio=lambda_ratio,
        threads=threads,
    )


def mine_from_split(
    train: Sequence[DashboardSpec],
    test: Sequence[DashboardSpec],
    seed: int = 0,
    *,
    train_frac: float = 0.75,
    top_rules: int = DEFAULT_TOP_RULES,
    max_conditions: int = DEFAULT_MAX_CONDITIONS,
    mappings: Sequence[Mapping] = MAPPINGS,
    n_lambdas: int = N_LAMBDAS,
    lambda_ratio: float = LAMBDA_RATIO,
    threads: int = 1,
) -> RuleSet:
    binz_train = binarized_features(train)
    binz_test = (
        binarized_features(test, thresholds=binz_train.thresholds) if test else None
    )

    fits: list[ModelFit] = []
    skipped: list[str] = []
    warnings = list(binz_train.warnings)

    jobs = []
    for mapping in mappings:
        table = _mapping_table(binz_train, mapping)
        cond_names = mapping_condition_bits(mapping)
        cond_matrix = table.columns(cond_names)
        design = _MappingDesign(cond_matrix, table.folds, max_conditions)
        for target in mapping_target_bits(mapping):
            y = table.bits[:, table.col_of[target]].astype(np.float64)
            if y.min() == y.max():
                skipped.append(
                    f"{mapping.id}/{target}: constant target on training data"
                )
                continue
            jobs.append((mapping, cond_names, cond_matrix, design, table, target, y))

    def run_job(job) -> ModelFit:
        mapping, cond_names, cond_matrix, design, table, target, y = job
        return fit_rule_model(
            cond_matrix,
            cond_names,
            y,
            table.folds,
            mapping.id,
            target,
            top_rules=top_rules,
            max_conditions=max_conditions,
            n_lambdas=n_lambdas,
            lambda_ratio=lambda_ratio,
            design=design,
        )

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(run_job, jobs))
    else:
        fits = [run_job(job) for job in jobs]

    # Test accuracy per model via the rule-vote predictor.
    models_meta = []
    rules_out: list[DecisionRule] = []
    for fit in sorted(fits, key=lambda f: (_mapping_order(f.mapping), f.target)):
        warnings.extend(fit.warnings)
        test_acc = float("nan")
        if binz_test is not None:
            mapping = MAPPING_BY_ID[fit.mapping]
            table = _mapping_table(binz_test, mapping)
            if table.bits.shape[0]:
                y_test = table.bits[:, table.col_of[fit.target]] > 0.5
                pred = predict_with_rules(
                    fit.rules, table.bits, table.col_of, fit.target, fit.threshold
                )
                test_acc = float((pred == y_test).mean())
        final_rules = [
            DecisionRule(
                mapping=r.mapping,
                condition=r.condition,
                target=r.target,
                coefficient=r.coefficient,
                importance=r.importance,
                support=r.support,
                train_acc=r.train_acc,
                test_acc=test_acc,
            )
            for r in fit.rules
        ]
        rules_out.extend(final_rules)
        models_meta.append(
            {
                "mapping": fit.mapping,
                "target": fit.target,
                "n_rules": len(final_rules),
                "lambda": fit.lambda_,
                "threshold": fit.threshold,
                "train_acc": fit.train_acc,
                "test_acc": test_acc,
            }
        )

    train_accs = [m["train_acc"] for m in models_meta]
    test_accs = [m["test_acc"] for m in models_meta if m["test_acc"] == m["test_acc"]]
    provenance = {
        "corpus": corpus_digest(list(train) + list(test)),
        "seed": seed,
        "train_frac": train_frac,
        "n_train_dashboards": len(train),
        "n_test_dashboards": len(test),
        "n_models": len(models_meta),
        "n_rules": len(rules_out),
        "macro_train_acc": float(np.mean(train_accs)) if train_accs else float("nan"),
        "macro_test_acc": float(np.mean(test_accs)) if test_accs else float("nan"),
        "models": models_meta,
        "skipped": skipped,
        "warnings": warnings,
    }
    return RuleSet(rules=rules_out, thresholds=binz_train.thresholds,
                   provenance=provenance)


def _mapping_order(mapping_id: str) -> int:
    return next(i for i, m in enumerate(MAPPINGS) if m.id == mapping_id)


# ---------------------------------------------------------------------------
# Evaluation


def evaluate_rules(
    ruleset: RuleSet, corpus: Sequence[DashboardSpec]
) -> dict:
    """Per-model accuracy and per-rule fire rate / precision on a corpus.

    The corpus is binarized with the rule set's stored thresholds, so a test
    corpus is scored exactly as it was during mining.
    """
    binz = binarized_features(corpus, thresholds=ruleset.thresholds)
    models = ruleset.provenance.get("models", [])
    by_model: dict[tuple[str, str], list[DecisionRule]] = {}
    for rule in ruleset.rules:
        by_model.setdefault((rule.mapping, rule.target.feature), []).append(rule)

    model_reports = []
    for meta in models:
        key = (meta["mapping"], meta["target"])
        rules = by_model.get(key, [])
        mapping = MAPPING_BY_ID[meta["mapping"]]
        table = _mapping_table(binz, mapping)
        y = table.bits[:, table.col_of[meta["target"]]] > 0.5
        pred = predict_with_rules(
            rules, table.bits, table.col_of, meta["target"],
            float(meta["threshold"]),
        )
        model_reports.append(
            {
                "mapping": meta["mapping"],
                "target": meta["target"],
                "accuracy": float((pred == y).mean()),
                "n_rules": len(rules),
            }
        )

    rule_reports = []
    for rule in ruleset.rules:
        mapping = MAPPING_BY_ID[rule.mapping]
        table = _mapping_table(binz, mapping)
        fired = np.ones(table.bits.shape[0], dtype=bool)
        for lit in rule.condition:
            col = table.bits[:, table.col_of[lit.feature]] > 0.5
            fired &= ~col if lit.negated else col
        target_col = table.bits[:, table.col_of[rule.target.feature]] > 0.5
        sat = ~target_col if rule.target.negated else target_col
        n_fired = int(fired.sum())
        rule_reports.append(
            {
                "mapping": rule.mapping,
                "rule": render_rule(rule),
                "fire_rate": n_fired / max(1, table.bits.shape[0]),
                "precision": float(sat[fired].mean()) if n_fired else float("nan"),
            }
        )

    accs = [m["accuracy"] for m in model_reports]
    return {
        "n_models": len(model_reports),
        "macro_accuracy": float(np.mean(accs)) if accs else float("nan"),
        "models": model_reports,
        "rules": rule_reports,
    }


# ---------------------------------------------------------------------------
# Natural-language rendering


_MARK_LABELS = {
    "text": "Text",
    "text_table": "Text table",
    "bar": "Bar",
    "line": "Line",
    "area": "Area",
    "circle": "Circle",
    "square": "Square",
    "shape": "Shape",
    "map": "Map",
    "pie": "Pie",
    "gantt": "Gantt",
    "polygon": "Polygon",
    "heatmap": "Heatmap",
}

_CHANNEL_LABELS = {
    "x": "X-axis",
    "y": "Y-axis",
    "color": "color",
    "size": "size",
    "shape": "shape",
}

_POSITION_PHRASES = {
    "a_left_of_b": "to the left of",
    "a_right_of_b": "to the right of",
    "a_above_b": "on the top of",
    "a_below_b": "on the bottom of",
    "a_top_left_of_b": "on the top left of",
    "a_top_right_of_b": "on the top right of",
    "a_bottom_left_of_b": "on the bottom left of",
    "a_bottom_right_of_b": "on the bottom right of",
}


def _phrase(lit: Literal, warnings: list[str]) -> str:
    """English phrase for one literal."""
    name = lit.feature
    neg = lit.negated
    subject, base = "View A", name
    if name.startswith("a_") and name[2:] in _SINGLE_BIT_SET:
        subject, base = "View A", name[2:]
    elif name.startswith("b_") and name[2:] in _SINGLE_BIT_SET:
        subject, base = "View B", name[2:]

    if base.startswith("mark="):
        label = _MARK_LABELS.get(base.split("=", 1)[1], base.split("=", 1)[1])
        return f"{subject} is {'not ' if neg else ''}{label}"
    if base.startswith("n_fields_") and base[9:] in _CHANNEL_LABELS:
        ch = _CHANNEL_LABELS[base[9:]]
        if neg:
            return f"{'it' if subject == 'View A' else subject} does not have fields on {ch}"
        return f"{subject} has fields on {ch}"
    if base.startswith("uses_"):
        ch = _CHANNEL_LABELS[base[5:]]
        return f"{subject} does {'not ' if neg else ''}use the {ch} channel"
    if base == "gh":
        return (f"{subject} should be of the height of 1"
                if neg else f"{subject} should be of a large height")
    if base == "gw":
        return (f"{subject} should be of the width of 1"
                if neg else f"{subject} should be of a large width")
    if base == "gy":
        return (f"{subject} should be placed at the top"
                if neg else f"{subject} should be placed toward the bottom")
    if base == "gx":
        return (f"{subject} should be placed at the left"
                if neg else f"{subject} should be placed toward the right")
    if base == "grid_area":
        return f"{subject} should {'not ' if neg else ''}take a large area"
    if base in ("cx", "cy", "px_x", "px_y", "px_w", "px_h", "aspect"):
        axis = {
            "cx": "horizontal center", "cy": "vertical center",
            "px_x": "left edge", "px_y": "top edge",
            "px_w": "width", "px_h": "height", "aspect": "aspect ratio",
        }[base]
        return f"{subject} should have a {'small' if neg else 'large'} {axis}"

    if name in _POSITION_PHRASES:
        rel = _POSITION_PHRASES[name]
        return (f"View A should {'not ' if neg else ''}be {rel} View B")
    if name == "same_mark":
        return ("View A and View B are of the same chart type" if not neg
                else "View A and View B are of different chart types")
    if name.startswith("is_equal_count_"):
        ch = _CHANNEL_LABELS[name[len("is_equal_count_"):]]
        eq = "the same number of" if not neg else "a different number of"
        return f"View A and View B use {eq} fields on {ch}"
    if name.startswith("is_overlapping_"):
        ch = _CHANNEL_LABELS[name[len("is_overlapping_"):]]
        if neg:
            return f"View A and View B do not use {ch} for the same fields"
        return f"View A and View B use {ch} for the same fields"
    if name.startswith("count_overlapping_"):
        ch = _CHANNEL_LABELS[name[len("count_overlapping_"):]]
        many = "few" if neg else "many"
        return f"View A and View B share {many} fields on {ch}"
    if name == "shared_fraction":
        if neg:
            return "View A and View B share less than 50% of the same fields"
        return "View A and View B share more than 50% of the same fields"
    if name == "shared_any":
        return (f"View A and View B share {'no' if neg else 'some'} fields")
    if name == "shared_field_count":
        return f"View A and View B share {'few' if neg else 'many'} fields"
    if name == "same_total_fields":
        eq = "the same" if not neg else "a different"
        return f"View A and View B encode {eq} number of fields"
    if name == "a_more_fields":
        return (f"View A has {'no ' if neg else ''}more fields than View B")
    if name == "a_larger_area":
        return (f"View A is {'not ' if neg else ''}larger than View B")
    if name in ("same_width", "same_height", "same_area"):
        dim = name.split("_")[1]
        return f"View A and View B have {'different' if neg else 'the same'} {dim}"
    if name == "center_distance":
        return (f"View A and View B are close to each other" if neg
                else "View A and View B are far from each other")
    if name == "rel_angle":
        return f"the direction from View A to View B is {'small' if neg else 'large'}"
    if name == "is_neighbour":
        return (f"View A and View B are {'not ' if neg else ''}adjacent")
    if name == "has_coordination":
        return (f"View A and View B are {'not ' if neg else ''}coordinated")
    if name in ("a_filters_b", "b_filters_a", "a_brushes_b", "b_brushes_a"):
        src, verb, tgt = name.split("_")
        src = "View A" if src == "a" else "View B"
        tgt = "View A" if tgt == "a" else "View B"
        verb = "filter" if verb == "filters" else "brush"
        return (f"{src} should {'not ' if neg else ''}{verb} {tgt}")

    warnings.append(f"no phrase for feature {name!r}; using the raw name")
    return f"{name} is {'false' if neg else 'true'}"


_SINGLE_BIT_SET = set(REGISTRY.bit_names("single"))


def render_rule(rule: DecisionRule, warnings: list[str] | None = None) -> str:
    """Deterministic English sentence 'If ..., then ...' for one rule."""
    if warnings is None:
        warnings = []
    conds = [_phrase(lit, warnings) for lit in rule.condition]
    target = _phrase(rule.target, warnings)
    return f"If {', and '.join(conds)}, then {target}."


def render_report(ruleset: RuleSet, evaluation: dict | None = None) -> str:
    """Markdown mining report: rules by importance plus model accuracies."""
    lines = ["# Mined design rules", ""]
    prov = ruleset.provenance
    if prov:
        lines += [
            f"- corpus: `{prov.get('corpus', '?')}`",
            f"- seed: {prov.get('seed', '?')}, train fraction: {prov.get('train_frac', '?')}",
            f"- models trained: {prov.get('n_models', '?')}, rules kept: {prov.get('n_rules', '?')}",
            f"- macro accuracy: train {prov.get('macro_train_acc', float('nan')):.3f}, "
            f"test {prov.get('macro_test_acc', float('nan')):.3f}",
            "",
        ]
    lines += ["## Rules by importance", ""]
    lines += ["| # | mapping | rule | importance | support | test acc |",
              "|---|---------|------|-----------:|--------:|---------:|"]
    ordered = sorted(
        ruleset.rules, key=lambda r: (-r.importance, r.mapping, r.target.feature)
    )
    for i, rule in enumerate(ordered, 1):
        lines.append(
            f"| {i} | {rule.mapping} | {render_rule(rule)} | "
            f"{rule.importance:.4f} | {rule.support:.3f} | {rule.test_acc:.3f} |"
        )
    if prov.get("skipped"):
        lines += ["", "## Skipped models", ""]
        lines += [f"- {s}" for s in prov["skipped"]]
    if prov.get("warnings"):
        lines += ["", "## Warnings", ""]
        lines += [f"- {w}" for w in prov["warnings"]]
    if evaluation is not None:
        lines += ["", "## Evaluation", "",
                  f"- macro accuracy: {evaluation['macro_accuracy']:.3f}",
                  f"- models: {evaluation['n_models']}"]
    return "\n".join(lines) + "\n"
