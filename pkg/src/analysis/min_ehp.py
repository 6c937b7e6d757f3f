"""
Minimum E_HP at fixed composition, read off the contact map.

The contact graph splits into connected clusters plus a pool of beads with no
contacts. Each cluster is solved exhaustively (best contact count and number of
optimal choices for every number of H beads placed in it); the clusters are
then combined with a counting knapsack over the total number of H beads.
"""
import itertools
import logging
from dataclasses import dataclass
from math import comb

import numpy as np

from src.config import COMPONENT_LIMIT
from src.errors import ComponentTooLarge, CompositionOutOfRange
from src.lattice.core import HpSequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MinEhpSolution:
    n_h: int
    min_ehp: int
    degeneracy: int
    witnesses: tuple = None


@dataclass
class _Cluster:
    beads: list
    best: list          # best[m]: most contacts with m H beads in the cluster
    multiplicity: list  # multiplicity[m]: number of placements reaching best[m]
    optimal_masks: list = None

    @property
    def size(self):
        return len(self.beads)


def contact_clusters(cmap):
    """Connected components of the contact graph, as sorted bead lists, plus the free beads."""
    adjacency = {}
    for i, j in cmap.contacts:
        adjacency.setdefault(i, set()).add(j)
        adjacency.setdefault(j, set()).add(i)

    seen = set()
    clusters = []
    for start in sorted(adjacency):
        if start in seen:
            continue
        stack, component = [start], []
        seen.add(start)
        while stack:
            v = stack.pop()
            component.append(v)
            for w in adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        clusters.append(sorted(component))
    free = [i for i in range(cmap.n) if i not in adjacency]
    return clusters, free


def _profile(beads, cmap, keep_masks):
    k = len(beads)
    if k > COMPONENT_LIMIT:
        raise ComponentTooLarge(k, COMPONENT_LIMIT)
    local = {b: pos for pos, b in enumerate(beads)}
    edges = [(local[i], local[j]) for i, j in cmap.contacts if i in local]

    masks = np.arange(1 << k, dtype=np.uint32)
    sizes = np.bitwise_count(masks).astype(np.int64)
    counts = np.zeros(masks.shape, dtype=np.int64)
    for a, b in edges:
        counts += ((masks >> a) & (masks >> b) & 1).astype(np.int64)

    best = np.full(k + 1, -1, dtype=np.int64)
    np.maximum.at(best, sizes, counts)
    optimal = counts == best[sizes]
    multiplicity = np.bincount(sizes[optimal], minlength=k + 1)

    optimal_masks = None
    if keep_masks:
        optimal_masks = [masks[optimal & (sizes == m)].tolist() for m in range(k + 1)]
    return _Cluster(beads, best.tolist(), [int(c) for c in multiplicity], optimal_masks)


def _free_pool(free):
    f = len(free)
    return _Cluster(free, [0] * (f + 1), [comb(f, m) for m in range(f + 1)])


def _knapsack(clusters):
    """Per-prefix tables {total H beads: (best contacts, placements)}."""
    tables = [{0: (0, 1)}]
    for cluster in clusters:
        prev, table = tables[-1], {}
        for total, (contacts, ways) in prev.items():
            for m in range(cluster.size + 1):
                value = contacts + cluster.best[m]
                count = ways * cluster.multiplicity[m]
                current = table.get(total + m)
                if current is None or value > current[0]:
                    table[total + m] = (value, count)
                elif value == current[0]:
                    table[total + m] = (value, current[1] + count)
        tables.append(table)
    return tables


def _choices(tables, clusters, k, total):
    """All ways to split `total` H beads over the first k clusters optimally."""
    if k == 0:
        yield ()
        return
    cluster = clusters[k - 1]
    target = tables[k][total][0]
    for m in range(min(cluster.size, total) + 1):
        prev = tables[k - 1].get(total - m)
        if prev is not None and prev[0] + cluster.best[m] == target:
            for rest in _choices(tables, clusters, k - 1, total - m):
                yield rest + (m,)


def _expand(cluster, m):
    if cluster.optimal_masks is None:
        return [list(c) for c in itertools.combinations(cluster.beads, m)]
    return [
        [b for pos, b in enumerate(cluster.beads) if (mask >> pos) & 1]
        for mask in cluster.optimal_masks[m]
    ]


def min_ehp_oracle(cmap, n_h, witnesses=False):
    n = cmap.n
    if not (0 <= n_h <= n):
        raise CompositionOutOfRange(n_h, n)

    components, free = contact_clusters(cmap)
    clusters = [_profile(c, cmap, witnesses) for c in components]
    clusters.append(_free_pool(free))
    logger.debug("Contact graph: %d clusters, %d free beads", len(components), len(free))

    tables = _knapsack(clusters)
    contacts, degeneracy = tables[-1][n_h]

    found = None
    if witnesses:
        found = set()
        for split in _choices(tables, clusters, len(clusters), n_h):
            options = [_expand(cluster, m) for cluster, m in zip(clusters, split)]
            for parts in itertools.product(*options):
                beads = [0] * n
                for part in parts:
                    for b in part:
                        beads[b] = 1
                found.add(HpSequence(tuple(beads)))
        found = tuple(sorted(found, key=lambda s: s.text))
    return MinEhpSolution(n_h, -contacts, degeneracy, found)
