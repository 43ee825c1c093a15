"""Regression trees for the ensemble models.

Split search is histogram-based: features are quantile-binned once per fit and
candidate splits are evaluated with prefix sums over bin aggregates, which keeps
ensemble training fast without changing the greedy variance-reduction criterion.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_BINS = 32


@dataclass
class BinnedMatrix:
    codes: np.ndarray       # (n, p) uint8 bin index per cell
    cuts: list              # per feature: thresholds between consecutive bins
    n_bins: np.ndarray      # bins actually used per feature


def bin_features(X: np.ndarray, max_bins: int = MAX_BINS) -> BinnedMatrix:
    n, p = X.shape
    codes = np.zeros((n, p), dtype=np.uint8)
    cuts = []
    n_bins = np.zeros(p, dtype=int)
    for j in range(p):
        col = X[:, j]
        uniq = np.unique(col)
        if uniq.size > max_bins:
            qs = np.quantile(col, np.linspace(0, 1, max_bins + 1)[1:-1])
            uniq = np.unique(qs)
        if uniq.size <= 1:
            cuts.append(np.empty(0))
            n_bins[j] = 1
            continue
        cut = (uniq[:-1] + uniq[1:]) / 2.0
        codes[:, j] = np.searchsorted(cut, col, side="left").astype(np.uint8)
        cuts.append(cut)
        n_bins[j] = uniq.size
    return BinnedMatrix(codes=codes, cuts=cuts, n_bins=n_bins)


@dataclass
class RegressionTree:
    """Flat-array tree; node 0 is the root, feature -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X: np.ndarray) -> np.ndarray:
        out = np.empty(X.shape[0])
        node = np.zeros(X.shape[0], dtype=int)
        active = np.arange(X.shape[0])
        while active.size:
            cur = node[active]
            leaf = self.feature[cur] < 0
            out[active[leaf]] = self.value[cur[leaf]]
            live = active[~leaf]
            cur = node[live]
            goes_left = X[live, self.feature[cur]] <= self.threshold[cur]
            node[live] = np.where(goes_left, self.left[cur], self.right[cur])
            active = live
        return out

    def to_jsonable(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": self.threshold.tolist(),
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "value": self.value.tolist(),
        }

    @classmethod
    def from_jsonable(cls, doc: dict) -> "RegressionTree":
        return cls(
            feature=np.array(doc["feature"], dtype=int),
            threshold=np.array(doc["threshold"], dtype=float),
            left=np.array(doc["left"], dtype=int),
            right=np.array(doc["right"], dtype=int),
            value=np.array(doc["value"], dtype=float),
        )


class _Builder:
    def __init__(self, binned, y, max_depth, min_leaf, n_candidates, rng):
        self.b = binned
        self.y = y
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.n_candidates = n_candidates
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.value.append(0.0)
        return len(self.feature) - 1

    def build(self, idx: np.ndarray, depth: int) -> int:
        node = self._new_node()
        yv = self.y[idx]
        self.value[node] = float(yv.mean())
        if depth >= self.max_depth or idx.size < 2 * self.min_leaf:
            return node
        split = self._best_split(idx)
        if split is None:
            return node
        j, cut_bin = split
        go_left = self.b.codes[idx, j] <= cut_bin
        self.feature[node] = j
        self.threshold[node] = float(self.b.cuts[j][cut_bin])
        self.left[node] = self.build(idx[go_left], depth + 1)
        self.right[node] = self.build(idx[~go_left], depth + 1)
        return node

    def _best_split(self, idx: np.ndarray):
        splittable = np.flatnonzero(self.b.n_bins > 1)
        if splittable.size == 0:
            return None
        if self.n_candidates is not None and self.n_candidates < splittable.size:
            cand = self.rng.choice(splittable, size=self.n_candidates, replace=False)
        else:
            cand = splittable
        cand = np.sort(cand)

        B = MAX_BINS
        codes = self.b.codes[np.ix_(idx, cand)].astype(np.intp)
        flat = (codes + np.arange(cand.size) * B).ravel()
        # codes.ravel() is row-major, so tile y across features the same way.
        yw = np.broadcast_to(self.y[idx][:, None], (idx.size, cand.size)).ravel()
        counts = np.bincount(flat, minlength=cand.size * B).reshape(cand.size, B)
        sums = np.bincount(flat, weights=yw, minlength=cand.size * B).reshape(cand.size, B)

        c_cnt = counts.cumsum(axis=1)
        c_sum = sums.cumsum(axis=1)
        total_n = idx.size
        total_sum = float(self.y[idx].sum())

        left_n = c_cnt[:, :-1]
        left_sum = c_sum[:, :-1]
        right_n = total_n - left_n
        right_sum = total_sum - left_sum
        ok = (left_n >= self.min_leaf) & (right_n >= self.min_leaf)
        with np.errstate(divide="ignore", invalid="ignore"):
            score = np.where(
                ok,
                left_sum**2 / np.maximum(left_n, 1) + right_sum**2 / np.maximum(right_n, 1),
                -np.inf,
            )
        base = total_sum**2 / total_n
        best_flat = int(np.argmax(score))
        fi, cut_bin = divmod(best_flat, B - 1)
        if not np.isfinite(score[fi, cut_bin]) or score[fi, cut_bin] <= base + 1e-12:
            return None
        j = int(cand[fi])
        if cut_bin >= self.b.cuts[j].size:
            return None
        return j, int(cut_bin)


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    max_depth: int,
    min_leaf: int,
    rng: np.random.Generator | None = None,
    n_candidate_features: int | None = None,
    binned: BinnedMatrix | None = None,
) -> RegressionTree:
    if binned is None:
        binned = bin_features(X)
    rng = rng or np.random.default_rng(0)
    b = _Builder(binned, np.asarray(y, dtype=float), max_depth, min_leaf,
                 n_candidate_features, rng)
    b.build(np.arange(X.shape[0]), 0)
    return RegressionTree(
        feature=np.array(b.feature, dtype=int),
        threshold=np.array(b.threshold, dtype=float),
        left=np.array(b.left, dtype=int),
        right=np.array(b.right, dtype=int),
        value=np.array(b.value, dtype=float),
    )
