"""Top-N recommendation strategies over the interaction history.

Five strategies share one contract: given an agent and a step, produce a
ranked list of at most N content ids, never including items the agent
already engaged with or authored. Ties are always broken by lower content
id so every strategy is deterministic.

Two layers live here. The plain functions (``recommend_random``,
``recommend_popular``, ...) compute straight from the catalog, log, or
interaction matrix and serve as the reference implementations. The
``*Index`` classes maintain the same quantities incrementally step by step
so a 600-step run stays cheap; the engine wires them up and the test suite
checks they agree with the reference functions exactly.
"""

from __future__ import annotations

import math
from collections import deque
from typing import Iterable, Optional, Sequence

import numpy as np

from .content import ContentCatalog, engagement
from .domain import (
    AgentProfile,
    InteractionKind,
    InteractionLog,
    RandomSource,
)

__all__ = [
    "InteractionMatrix",
    "recommend_random",
    "recommend_popular",
    "recommend_user_knn",
    "recommend_item_knn",
    "recommend_content_based",
    "PopularityIndex",
    "UserSimilarityIndex",
    "ItemSimilarityIndex",
    "ContentOrderCache",
]


class InteractionMatrix:
    """Sparse-in-spirit binary user x item matrix of Engage events.

    Entry (u, i) is 1 iff an Engage record for (u, i) exists at or before
    the current step; the engine commits events at the end of each step so
    the matrix acts as the frozen snapshot during recommendation. Stored
    densely (200 users x a few thousand items is small).
    """

    def __init__(self, n_users: int, capacity: int = 512):
        self.n_users = n_users
        self._dense = np.zeros((n_users, capacity), dtype=bool)
        self._n_items = 0
        self._user_counts = np.zeros(n_users, dtype=np.int64)
        self._item_counts = np.zeros(capacity, dtype=np.int64)

    @property
    def n_items(self) -> int:
        return self._n_items

    def ensure_items(self, n_items: int) -> None:
        if n_items > self._dense.shape[1]:
            cap = max(n_items, self._dense.shape[1] * 2)
            dense = np.zeros((self.n_users, cap), dtype=bool)
            dense[:, : self._n_items] = self._dense[:, : self._n_items]
            self._dense = dense
            counts = np.zeros(cap, dtype=np.int64)
            counts[: self._n_items] = self._item_counts[: self._n_items]
            self._item_counts = counts
        self._n_items = max(self._n_items, n_items)

    def add(self, user: int, item: int) -> bool:
        self.ensure_items(item + 1)
        if self._dense[user, item]:
            return False
        self._dense[user, item] = True
        self._user_counts[user] += 1
        self._item_counts[item] += 1
        return True

    def entry(self, user: int, item: int) -> bool:
        return item < self._n_items and bool(self._dense[user, item])

    def row(self, user: int) -> np.ndarray:
        return self._dense[user, : self._n_items]

    def column(self, item: int) -> np.ndarray:
        return self._dense[: self.n_users, item]

    def user_count(self, user: int) -> int:
        return int(self._user_counts[user])

    def item_counts(self) -> np.ndarray:
        return self._item_counts[: self._n_items]

    def dense(self) -> np.ndarray:
        return self._dense[:, : self._n_items]

    def copy(self) -> "InteractionMatrix":
        out = InteractionMatrix(self.n_users, capacity=max(1, self._n_items))
        out.ensure_items(self._n_items)
        out._dense[:, : self._n_items] = self._dense[:, : self._n_items]
        out._user_counts = self._user_counts.copy()
        out._item_counts[: self._n_items] = self._item_counts[: self._n_items]
        return out


def _eligible_mask(catalog: ContentCatalog, agent_id: int, engaged: Iterable[int],
                   n_items: Optional[int] = None) -> np.ndarray:
    n = catalog.n_items if n_items is None else n_items
    mask = catalog.author_view[:n] != agent_id
    engaged_ids = [i for i in engaged if i < n]
    if engaged_ids:
        mask = mask.copy()
        mask[engaged_ids] = False
    return mask


def _ranked_walk(order: Sequence[int], scores: np.ndarray, eligible: np.ndarray,
                 n: int, drop_nonpositive: bool) -> list[int]:
    out: list[int] = []
    for idx in order:
        idx = int(idx)
        if drop_nonpositive and scores[idx] <= 0.0:
            break  # order is descending, nothing positive remains
        if not eligible[idx]:
            continue
        out.append(idx)
        if len(out) == n:
            break
    return out


def _rank_top_n(scores: np.ndarray, eligible: np.ndarray, n: int,
                drop_nonpositive: bool = False) -> list[int]:
    """Top-n ids by (score desc, id asc) among eligible items."""
    order = np.argsort(-scores, kind="stable")  # stable sort: ties keep ascending id
    return _ranked_walk(order, scores, eligible, n, drop_nonpositive)


def _topk_by_similarity(vals: np.ndarray, ids: np.ndarray, k: int) -> np.ndarray:
    """Indices of the top-k entries by (value desc, id asc), positives only."""
    order = np.lexsort((ids, -vals))
    take = order[: min(k, len(order))]
    return take[vals[take] > 0.0]


def recommend_random(agent_id: int, catalog: ContentCatalog, n: int, rng: RandomSource,
                     engaged: Iterable[int] = ()) -> list[int]:
    """Uniform sample of n distinct eligible items, in sample order."""
    if catalog.n_items == 0:
        return []
    eligible = np.flatnonzero(_eligible_mask(catalog, agent_id, engaged))
    size = min(n, len(eligible))
    if size == 0:
        return []
    picks = rng.choice(eligible, size=size, replace=False)
    return [int(i) for i in picks]


def recommend_popular(agent_id: int, catalog: ContentCatalog, log: InteractionLog,
                      n: int, step: int, window: int = 20, bump: float = 0.1,
                      engaged: Optional[Iterable[int]] = None) -> list[int]:
    """Rank by current engagement plus engage-event count in [step-window, step].

    Engagement is recomputed from the log's events, so this function sees
    exactly what the passed log contains. Items created after ``step`` are
    not candidates.
    """
    n_items = int(np.sum(catalog.created_view <= step))
    if n_items == 0:
        return []
    events_by_item: dict[int, list[int]] = {}
    window_counts = np.zeros(n_items, dtype=np.float64)
    agent_engaged: set[int] = set() if engaged is None else set(engaged)
    for rec in log:
        if (rec.kind is not InteractionKind.ENGAGE or rec.content_id >= n_items
                or rec.step > step):
            continue
        events_by_item.setdefault(rec.content_id, []).append(rec.step)
        if step - window <= rec.step <= step:
            window_counts[rec.content_id] += 1.0
        if engaged is None and rec.agent_id == agent_id:
            agent_engaged.add(rec.content_id)

    scores = np.empty(n_items, dtype=np.float64)
    for i in range(n_items):
        scores[i] = engagement(catalog.item(i), step, events_by_item.get(i, ()), bump)
    scores += window_counts

    eligible = _eligible_mask(catalog, agent_id, agent_engaged, n_items)
    return _rank_top_n(scores, eligible, n)


def _user_sims(dense: np.ndarray, agent_id: int) -> tuple[np.ndarray, np.ndarray]:
    """Cosine similarity of the agent's row against every nonzero row."""
    counts = dense.sum(axis=1).astype(np.float64)
    overlap = dense @ dense[agent_id].astype(np.float64)  # integer-valued, exact
    candidates = np.flatnonzero(counts > 0)
    candidates = candidates[candidates != agent_id]
    sims = overlap[candidates] / (np.sqrt(counts[candidates]) * math.sqrt(counts[agent_id]))
    return candidates, sims


def recommend_user_knn(agent_id: int, matrix: InteractionMatrix, catalog: ContentCatalog,
                       k: int, n: int) -> list[int]:
    """User-based collaborative filtering.

    Neighbors are the k most similar users by cosine over binary interaction
    rows (excluding the agent and all-zero rows); an item's score is the
    summed similarity of neighbors who engaged it. Zero-score items are
    never recommended.
    """
    if matrix.user_count(agent_id) == 0 or matrix.n_items == 0:
        return []
    dense = matrix.dense()
    candidates, sims = _user_sims(dense, agent_id)
    if len(candidates) == 0:
        return []
    order = np.lexsort((candidates, -sims))[: min(k, len(candidates))]
    nbr_ids = candidates[order]
    nbr_sims = sims[order]
    by_id = np.argsort(nbr_ids)  # canonical ascending-id summation order
    nbr_ids, nbr_sims = nbr_ids[by_id], nbr_sims[by_id]

    scores = (nbr_sims[:, None] * dense[nbr_ids]).sum(axis=0)
    eligible = _eligible_mask(catalog, agent_id, np.flatnonzero(dense[agent_id]),
                              matrix.n_items)
    return _rank_top_n(scores, eligible, n, drop_nonpositive=True)


def recommend_item_knn(agent_id: int, matrix: InteractionMatrix, catalog: ContentCatalog,
                       k: int, n: int) -> list[int]:
    """Item-based collaborative filtering.

    Item-item cosine over binary interaction columns; a candidate's score
    sums its similarity to the agent's engaged items, restricted to the
    candidate's k most similar items overall. Zero-score candidates are
    never recommended.
    """
    if matrix.user_count(agent_id) == 0 or matrix.n_items == 0:
        return []
    dense = matrix.dense()
    cols = np.flatnonzero(matrix.item_counts() > 0)  # ascending item id
    if len(cols) == 0:
        return []
    sub = dense[:, cols].astype(np.float64)
    co = sub.T @ sub  # integer-valued, exact in float64
    norms = np.sqrt(np.diag(co))
    sims = co / np.outer(norms, norms)
    np.fill_diagonal(sims, -1.0)

    engaged = np.flatnonzero(dense[agent_id])
    engaged_col_mask = np.zeros(len(cols), dtype=bool)
    engaged_col_mask[np.searchsorted(cols, engaged)] = True

    scores_cols = np.zeros(len(cols), dtype=np.float64)
    for c in range(len(cols)):
        top = _topk_by_similarity(sims[c], cols, k)
        sel = top[engaged_col_mask[top]]
        if len(sel):
            sel = sel[np.argsort(cols[sel])]  # ascending item id summation
            scores_cols[c] = float(np.add.reduce(sims[c, sel]))

    scores = np.zeros(matrix.n_items, dtype=np.float64)
    scores[cols] = scores_cols
    eligible = _eligible_mask(catalog, agent_id, engaged, matrix.n_items)
    return _rank_top_n(scores, eligible, n, drop_nonpositive=True)


def recommend_content_based(agent: AgentProfile, catalog: ContentCatalog, n: int,
                            step: int, engaged: Iterable[int] = ()) -> list[int]:
    """Rank by cosine between item topics and the agent's preference vector.

    Zero or negative similarities still rank (ordered by id on ties); items
    created after ``step`` are not candidates.
    """
    n_items = int(np.sum(catalog.created_view <= step))
    if n_items == 0:
        return []
    # Topic and preference vectors are unit-norm, so the dot product is the cosine.
    scores = (catalog.topics_view[:n_items] * agent.preference_vector).sum(axis=1)
    eligible = _eligible_mask(catalog, agent.id, engaged, n_items)
    return _rank_top_n(scores, eligible, n)


# ---------------------------------------------------------------------------
# Incremental per-step indexes used by the engine.
# ---------------------------------------------------------------------------


class PopularityIndex:
    """Rolling engage-count window plus catalog engagement, one rank per step."""

    def __init__(self, catalog: ContentCatalog, window: int):
        self.catalog = catalog
        self.window = window
        self._counts = np.zeros(512, dtype=np.float64)
        self._recent: deque[tuple[int, list[int]]] = deque()
        self._order: Optional[np.ndarray] = None

    def _ensure(self, n_items: int) -> None:
        if n_items > len(self._counts):
            counts = np.zeros(max(n_items, len(self._counts) * 2), dtype=np.float64)
            counts[: len(self._counts)] = self._counts
            self._counts = counts

    def commit_step(self, step: int, engaged_items: list[int]) -> None:
        self._ensure(self.catalog.n_items)
        if engaged_items:
            np.add.at(self._counts, engaged_items, 1.0)
        self._recent.append((step, engaged_items))

    def prepare(self, step: int) -> None:
        """Compute the global ranking for this step's recommendations."""
        self._ensure(self.catalog.n_items)
        while self._recent and self._recent[0][0] < step - self.window:
            _, items = self._recent.popleft()
            if items:
                np.add.at(self._counts, items, -1.0)
        n = self.catalog.n_items
        scores = self.catalog.engagement_all(step) + self._counts[:n]
        self._scores = scores
        self._order = np.argsort(-scores, kind="stable")

    def recommend(self, agent_id: int, engaged: set[int], author_view: np.ndarray,
                  n: int) -> list[int]:
        out: list[int] = []
        for idx in self._order:
            idx = int(idx)
            if idx in engaged or author_view[idx] == agent_id:
                continue
            out.append(idx)
            if len(out) == n:
                break
        return out


class UserSimilarityIndex:
    """Incrementally maintained user-user co-engagement counts.

    G[u, v] = |items engaged by both u and v|; G[u, u] is u's engagement
    count. Updated per engage event in O(#prior engagers of the item).
    """

    def __init__(self, n_users: int):
        self.n_users = n_users
        self.G = np.zeros((n_users, n_users), dtype=np.int64)
        self._engagers: list[list[int]] = []

    def commit_event(self, user: int, item: int) -> None:
        while item >= len(self._engagers):
            self._engagers.append([])
        prev = self._engagers[item]
        if prev:
            arr = np.asarray(prev, dtype=np.int64)
            self.G[user, arr] += 1
            self.G[arr, user] += 1
        self.G[user, user] += 1
        prev.append(user)

    def neighbors(self, agent_id: int, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Top-k neighbor ids (ascending) and their similarities to the agent."""
        diag = np.diag(self.G).astype(np.float64)
        own = diag[agent_id]
        if own == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        candidates = np.flatnonzero(diag > 0)
        candidates = candidates[candidates != agent_id]
        if len(candidates) == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        sims = self.G[agent_id, candidates] / (np.sqrt(diag[candidates]) * math.sqrt(own))
        order = np.lexsort((candidates, -sims))[: min(k, len(candidates))]
        nbr_ids = candidates[order]
        nbr_sims = sims[order]
        by_id = np.argsort(nbr_ids)
        return nbr_ids[by_id], nbr_sims[by_id]


class ItemSimilarityIndex:
    """Incrementally maintained item-item cosines with per-item top-k lists.

    Columns are allocated on an item's first engagement. Each step the
    engine commits that step's engage events; only rows whose top-k could
    have changed are rebuilt:

    - rows of items whose counts changed (set D), and
    - rows r whose stored boundary threshold could be beaten by a new value
      in columns D, or that currently hold a member of D in their top-k.

    This is exact: for r outside D the only changed entries are in columns
    D (every count update pairs the engaged item with another item), and
    r's own norm is unchanged.
    """

    def __init__(self, k: int, capacity: int = 256):
        self.k = k
        self._m = 0
        self._item_of_col = np.zeros(capacity, dtype=np.int64)
        self._col_of_item: dict[int, int] = {}
        self._C = np.zeros((capacity, capacity), dtype=np.int32)
        self._norms = np.zeros(capacity, dtype=np.float64)
        self._top_cols = np.zeros((capacity, k), dtype=np.int64)
        self._top_vals = np.zeros((capacity, k), dtype=np.float64)
        self._top_len = np.zeros(capacity, dtype=np.int64)
        self._theta = np.zeros(capacity, dtype=np.float64)
        self._user_cols: dict[int, list[int]] = {}

    @property
    def n_cols(self) -> int:
        return self._m

    def _grow(self, needed: int) -> None:
        cap = len(self._item_of_col)
        if needed <= cap:
            return
        new_cap = max(needed, cap * 2)
        C = np.zeros((new_cap, new_cap), dtype=np.int32)
        C[: self._m, : self._m] = self._C[: self._m, : self._m]
        self._C = C
        for name in ("_item_of_col", "_norms", "_top_len", "_theta"):
            old = getattr(self, name)
            new = np.zeros(new_cap, dtype=old.dtype)
            new[: self._m] = old[: self._m]
            setattr(self, name, new)
        for name in ("_top_cols", "_top_vals"):
            old = getattr(self, name)
            new = np.zeros((new_cap, self.k), dtype=old.dtype)
            new[: self._m] = old[: self._m]
            setattr(self, name, new)

    def _col_for(self, item: int) -> int:
        col = self._col_of_item.get(item)
        if col is None:
            self._grow(self._m + 1)
            col = self._m
            self._col_of_item[item] = col
            self._item_of_col[col] = item
            self._top_cols[col, :] = col  # self-padding, see _pad note below
            self._m += 1
        return col

    def commit_step(self, events: list[tuple[int, int]]) -> None:
        """Apply one step's engage events ((user, item) pairs, in order)."""
        if not events:
            return
        changed: set[int] = set()
        for user, item in events:
            col = self._col_for(item)
            prior = self._user_cols.setdefault(user, [])
            if prior:
                arr = np.asarray(prior, dtype=np.int64)
                self._C[col, arr] += 1
                self._C[arr, col] += 1
            self._C[col, col] += 1
            prior.append(col)
            changed.add(col)
        self._refresh(np.asarray(sorted(changed), dtype=np.int64))

    def _refresh(self, d_cols: np.ndarray) -> None:
        m = self._m
        diag = self._C[: m, : m].diagonal().astype(np.float64)
        self._norms[: m] = np.sqrt(diag)
        norms = self._norms[: m]

        # New similarity values in the changed columns, for every row.
        block = self._C[: m, d_cols].astype(np.float64)
        block /= norms[:, None]
        block /= norms[d_cols][None, :]

        theta = self._theta[: m]
        could_enter = ((block >= theta[:, None]) & (block > 0.0)).any(axis=1)
        changed_col = np.zeros(m, dtype=bool)
        changed_col[d_cols] = True
        holds_changed = changed_col[self._top_cols[: m]].any(axis=1)
        rebuild = np.flatnonzero(could_enter | holds_changed | changed_col)
        for r in rebuild:
            self._rebuild_row(int(r), norms)

    def _rebuild_row(self, r: int, norms: np.ndarray) -> None:
        m = self._m
        row = self._C[r, : m].astype(np.float64)
        row /= norms[r] * norms
        row[r] = -1.0
        take = _topk_by_similarity(row, self._item_of_col[: m], self.k)
        if len(take):
            take = take[np.argsort(self._item_of_col[take])]  # ascending item id
        cnt = len(take)
        self._top_cols[r, :cnt] = take
        self._top_cols[r, cnt:] = r  # self-padding: never in D-trigger for row r
        self._top_vals[r, :cnt] = row[take]
        self._top_vals[r, cnt:] = 0.0
        self._top_len[r] = cnt
        self._theta[r] = float(row[take].min()) if cnt == self.k else 0.0

    def scores(self, user: int) -> tuple[np.ndarray, np.ndarray]:
        """(item ids, scores) over all indexed items for ``user``."""
        m = self._m
        if m == 0:
            return np.empty(0, dtype=np.int64), np.empty(0)
        engaged_mask = np.zeros(m, dtype=bool)
        cols = self._user_cols.get(user)
        if cols:
            engaged_mask[cols] = True
        contrib = self._top_vals[: m] * engaged_mask[self._top_cols[: m]]
        return self._item_of_col[: m].copy(), contrib.sum(axis=1)

    def full_rebuild_reference(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Recompute top-k state from C alone (test oracle for the triggers)."""
        m = self._m
        diag = self._C[: m, : m].diagonal().astype(np.float64)
        norms = np.sqrt(diag)
        top_cols = np.zeros((m, self.k), dtype=np.int64)
        top_vals = np.zeros((m, self.k), dtype=np.float64)
        top_len = np.zeros(m, dtype=np.int64)
        for r in range(m):
            row = self._C[r, : m].astype(np.float64)
            row /= norms[r] * norms
            row[r] = -1.0
            take = _topk_by_similarity(row, self._item_of_col[: m], self.k)
            if len(take):
                take = take[np.argsort(self._item_of_col[take])]
            top_cols[r, : len(take)] = take
            top_cols[r, len(take):] = r
            top_vals[r, : len(take)] = row[take]
            top_len[r] = len(take)
        return top_cols, top_vals, top_len


class ContentOrderCache:
    """Per-agent content ranking kept exactly sorted by (cosine desc, id asc).

    Topic and preference vectors never change, so each agent's ranking is
    computed once and new items are merge-inserted as the catalog grows.
    """

    def __init__(self, catalog: ContentCatalog):
        self.catalog = catalog
        self._orders: dict[int, np.ndarray] = {}
        self._scores: dict[int, np.ndarray] = {}
        self._seen: dict[int, int] = {}

    def _scores_for(self, pref: np.ndarray, lo: int, hi: int) -> np.ndarray:
        return (self.catalog.topics_view[lo:hi] * pref).sum(axis=1)

    def order_for(self, agent: AgentProfile) -> tuple[np.ndarray, np.ndarray]:
        n = self.catalog.n_items
        aid = agent.id
        if aid not in self._orders:
            scores = self._scores_for(agent.preference_vector, 0, n)
            ids = np.arange(n)
            order = np.lexsort((ids, -scores))
            self._orders[aid] = order
            self._scores[aid] = scores
            self._seen[aid] = n
            return order, scores
        seen = self._seen[aid]
        if n > seen:
            new_scores = self._scores_for(agent.preference_vector, seen, n)
            # Keep the score array indexed by item id; only the insertion
            # order is batch-sorted.
            self._scores[aid] = np.concatenate([self._scores[aid], new_scores])
            new_ids = np.arange(seen, n)
            batch = np.lexsort((new_ids, -new_scores))
            new_ids_sorted = new_ids[batch]
            new_scores_sorted = new_scores[batch]
            order = self._orders[aid]
            old_sorted = -self._scores[aid][order]
            positions = np.searchsorted(old_sorted, -new_scores_sorted, side="right")
            self._orders[aid] = np.insert(order, positions, new_ids_sorted)
            self._seen[aid] = n
        return self._orders[aid], self._scores[aid]

    def recommend(self, agent: AgentProfile, engaged: set[int], author_view: np.ndarray,
                  n: int) -> list[int]:
        order, _ = self.order_for(agent)
        out: list[int] = []
        aid = agent.id
        for idx in order:
            idx = int(idx)
            if idx in engaged or author_view[idx] == aid:
                continue
            out.append(idx)
            if len(out) == n:
                break
        return out
