"""Center region extraction from a collar segmentation mask.

The chain is: single-linkage clustering of set pixels, selection of the
largest cluster, dilation to bridge prediction noise, Zhang-Suen thinning
to a one-pixel-wide skeleton, and finally the skeleton pixel of maximum
closeness centrality as the collar's center point.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .errors import NoDetectionError
from .types import BinaryMask


@dataclass(frozen=True)
class PixelCluster:
    """A group of set pixels, stored as an (n, 2) array of (row, col)."""

    pixels: np.ndarray
    id: int

    def __post_init__(self):
        arr = np.asarray(self.pixels, dtype=np.intp)
        if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] == 0:
            raise ValueError(f"cluster pixels must be a non-empty (n, 2) array, got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "pixels", arr)

    def size(self) -> int:
        return self.pixels.shape[0]

    def min_pixel(self) -> tuple[int, int]:
        idx = np.lexsort((self.pixels[:, 1], self.pixels[:, 0]))[0]
        return int(self.pixels[idx, 0]), int(self.pixels[idx, 1])

    def to_mask(self, height: int, width: int) -> BinaryMask:
        bits = np.zeros((height, width), dtype=bool)
        bits[self.pixels[:, 0], self.pixels[:, 1]] = True
        return BinaryMask(bits)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        root = a
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[a] != root:
            self.parent[a], a = root, self.parent[a]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def cluster_mask(mask: BinaryMask, link_dist: float = 10.0) -> list[PixelCluster]:
    """Single-linkage agglomerative clustering of set pixels.

    Two pixels land in the same cluster iff they are joined by a chain of
    pixel pairs each within Euclidean distance link_dist, which is exactly
    connected components of the distance-threshold graph. Returns [] for
    an all-zero mask. Clusters are ordered (and numbered) by their minimal
    (row, col) pixel.
    """
    if link_dist <= 0:
        raise ValueError("link_dist must be positive")
    rows, cols = np.nonzero(mask.bits)
    n = rows.size
    if n == 0:
        return []
    coords = np.stack([rows, cols], axis=1)

    if link_dist >= 2.0:
        # Any 8-neighbor pair is within sqrt(2) <= link_dist, so whole
        # 8-connected components merge up front; only cross-component links
        # remain, and the closest pair between two components is always
        # boundary-to-boundary, so searching boundary pixels is exact.
        eight = np.ones((3, 3), dtype=bool)
        labels, ncomp = ndimage.label(mask.bits, structure=eight)
        pixel_labels = labels[rows, cols] - 1
        dsu = _DisjointSet(ncomp)
        if ncomp > 1:
            boundary = mask.bits & ~ndimage.binary_erosion(mask.bits, structure=eight)
            brows, bcols = np.nonzero(boundary)
            bcoords = np.stack([brows, bcols], axis=1)
            blabels = labels[brows, bcols] - 1
            tree = cKDTree(bcoords.astype(np.float64))
            pairs = tree.query_pairs(r=link_dist, output_type="ndarray")
            for i, j in pairs:
                if blabels[i] != blabels[j]:
                    dsu.union(int(blabels[i]), int(blabels[j]))
        roots = np.fromiter((dsu.find(int(c)) for c in pixel_labels),
                            dtype=np.intp, count=n)
    else:
        dsu = _DisjointSet(n)
        tree = cKDTree(coords.astype(np.float64))
        pairs = tree.query_pairs(r=link_dist, output_type="ndarray")
        for i, j in pairs:
            dsu.union(int(i), int(j))
        roots = np.fromiter((dsu.find(i) for i in range(n)), dtype=np.intp, count=n)

    clusters = []
    # nonzero order is row-major; order clusters by their first (minimal)
    # pixel so numbering is deterministic.
    _, first_index = np.unique(roots, return_index=True)
    for cid, root in enumerate(roots[np.sort(first_index)]):
        clusters.append(PixelCluster(coords[roots == root], id=cid))
    return clusters


def largest_cluster(clusters: list[PixelCluster]) -> PixelCluster:
    """Cluster with the most pixels; ties go to the smallest (row, col) pixel."""
    if not clusters:
        raise NoDetectionError("no clusters: mask is empty")
    return max(clusters, key=lambda c: (c.size(), tuple(-v for v in c.min_pixel())))


def dilate(mask: BinaryMask, radius: int = 1, iterations: int = 1) -> BinaryMask:
    """Morphological dilation with a square (2*radius+1) structuring element."""
    if radius < 1 or iterations < 1:
        raise ValueError("radius and iterations must be >= 1")
    structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    out = ndimage.binary_dilation(mask.bits, structure=structure, iterations=iterations)
    return BinaryMask(out)


def close(mask: BinaryMask, radius: int = 1, iterations: int = 1) -> BinaryMask:
    """Morphological closing (dilation then erosion), same structuring element.

    Optional alternative to plain dilation for denoising the clustered
    prediction without inflating the region.
    """
    if radius < 1 or iterations < 1:
        raise ValueError("radius and iterations must be >= 1")
    structure = np.ones((2 * radius + 1, 2 * radius + 1), dtype=bool)
    grown = ndimage.binary_dilation(mask.bits, structure=structure, iterations=iterations)
    out = ndimage.binary_erosion(grown, structure=structure, iterations=iterations)
    return BinaryMask(out)


def _neighbors_clockwise(bits: np.ndarray) -> list[np.ndarray]:
    """The 8 neighborhoods P2..P9 (N, NE, E, SE, S, SW, W, NW) of every
    interior pixel of a 1-padded image."""
    p = np.pad(bits, 1, mode="constant").astype(np.uint8)
    return [
        p[:-2, 1:-1],   # P2 north
        p[:-2, 2:],     # P3 north-east
        p[1:-1, 2:],    # P4 east
        p[2:, 2:],      # P5 south-east
        p[2:, 1:-1],    # P6 south
        p[2:, :-2],     # P7 south-west
        p[1:-1, :-2],   # P8 west
        p[:-2, :-2],    # P9 north-west
    ]


def skeletonize(mask: BinaryMask) -> BinaryMask:
    """Zhang-Suen thinning: iterate both subcycles until no pixel changes.

    Output is a subset of the input and preserves its 8-connectivity.
    An empty mask yields an empty skeleton.
    """
    bits = mask.bits.copy()
    while True:
        changed = False
        for subcycle in (0, 1):
            nb = _neighbors_clockwise(bits)
            p2, p3, p4, p5, p6, p7, p8, p9 = nb
            b = sum(n.astype(np.int32) for n in nb)
            seq = nb + [nb[0]]
            a = sum(((seq[i] == 0) & (seq[i + 1] == 1)) for i in range(8))
            if subcycle == 0:
                cond_c = p2 * p4 * p6 == 0
                cond_d = p4 * p6 * p8 == 0
            else:
                cond_c = p2 * p4 * p8 == 0
                cond_d = p2 * p6 * p8 == 0
            remove = bits & (b >= 2) & (b <= 6) & (a == 1) & cond_c & cond_d
            if remove.any():
                bits &= ~remove
                changed = True
        if not changed:
            return BinaryMask(bits)


@dataclass(frozen=True)
class SkeletonGraph:
    """Pixel graph of a skeleton: node per set pixel, unit-weight edge per
    8-neighbor pair. adjacency[i] lists neighbor node indices of node i."""

    nodes: np.ndarray
    adjacency: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        arr = np.asarray(self.nodes, dtype=np.intp)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError(f"nodes must be (n, 2), got {arr.shape}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "nodes", arr)

    def __len__(self) -> int:
        return self.nodes.shape[0]


def skeleton_graph(skeleton: BinaryMask) -> SkeletonGraph:
    """Build the 8-connectivity pixel graph of a skeleton mask."""
    rows, cols = np.nonzero(skeleton.bits)
    nodes = np.stack([rows, cols], axis=1)
    index = {(int(r), int(c)): i for i, (r, c) in enumerate(nodes)}
    adjacency = []
    for r, c in nodes:
        nbrs = []
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                if dr == 0 and dc == 0:
                    continue
                j = index.get((int(r) + dr, int(c) + dc))
                if j is not None:
                    nbrs.append(j)
        adjacency.append(tuple(sorted(nbrs)))
    return SkeletonGraph(nodes, tuple(adjacency))


def _bfs_distances(graph: SkeletonGraph, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v in graph.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return dist


def _dijkstra_distances(graph: SkeletonGraph, source: int,
                        diagonal_weight: float) -> dict[int, float]:
    """Shortest paths with axis hops costing 1 and diagonal hops costing
    diagonal_weight. Only needed when diagonal_weight != 1."""
    import heapq

    dist = {source: 0.0}
    heap = [(0.0, source)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist.get(u, np.inf):
            continue
        ur, uc = graph.nodes[u]
        for v in graph.adjacency[u]:
            vr, vc = graph.nodes[v]
            step = diagonal_weight if (ur != vr and uc != vc) else 1.0
            nd = d + step
            if nd < dist.get(v, np.inf):
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def closeness_center(graph: SkeletonGraph, diagonal_weight: float = 1.0) -> tuple[int, int]:
    """Skeleton pixel with maximum closeness centrality.

    Restricted to the largest connected component (smaller fragments are
    thinning noise), the returned node minimizes the sum of shortest-path
    distances to every other component node; hops count 1 by default,
    with diagonal steps optionally weighted. Ties break to the smallest
    (row, col).
    """
    n = len(graph)
    if n == 0:
        raise NoDetectionError("empty skeleton graph")

    def distances(source: int):
        if diagonal_weight == 1.0:
            return _bfs_distances(graph, source)
        return _dijkstra_distances(graph, source, diagonal_weight)

    # Node order is row-major, so scanning in index order makes component
    # and centrality tie-breaks lexicographic on (row, col) for free.
    assigned = [False] * n
    best_component: list[int] = []
    for start in range(n):
        if assigned[start]:
            continue
        component = sorted(_bfs_distances(graph, start).keys())
        for i in component:
            assigned[i] = True
        if len(component) > len(best_component):
            best_component = component

    best_node = -1
    best_total = None
    for i in best_component:
        total = sum(distances(i).values())
        if best_total is None or total < best_total:
            best_total = total
            best_node = i
    r, c = graph.nodes[best_node]
    return int(r), int(c)


def extract_center(mask: BinaryMask, link_dist: float = 10.0,
                   dilate_radius: int = 1, dilate_iters: int = 1,
                   closing: bool = False, diagonal_weight: float = 1.0) -> tuple[int, int]:
    """Full center extraction: cluster, keep largest, denoise, thin, take
    the skeleton's closeness-centrality maximizer."""
    clusters = cluster_mask(mask, link_dist)
    cluster = largest_cluster(clusters)
    denoise = close if closing else dilate
    region = denoise(cluster.to_mask(mask.height, mask.width), dilate_radius, dilate_iters)
    skeleton = skeletonize(region)
    return closeness_center(skeleton_graph(skeleton), diagonal_weight)
