"""Haar wavelet-packet analysis of square images and the three compression classes.

The full packet decomposition of a 2^p x 2^p image to depth d is a
quad-tree: node (level, pos) holds a coefficient block of side
side/2^level, and the four children of a node are the orthonormal Haar
subbands of its block, in the order approx, horizontal, vertical,
diagonal (pos encodes the path in base 4).  With the normalized filters
(1, 1)/sqrt(2) and (1, -1)/sqrt(2) every level is an orthonormal change
of basis, so per-level energy equals image energy and any maximal
anti-chain of the tree indexes an orthonormal basis.

BestBasis is the textbook bottom-up dynamic program over an additive
cost: a node keeps its own block iff its cost is <= the sum of its
children's optimal costs (ties go to the parent, i.e. the coarser
basis).  Two costs are provided: Shannon entropy of the squared
coefficients normalized by total image energy (the constant
normalization keeps the cost additive across nodes, with 0 log 0 = 0),
and the plain l1 norm.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import DepthTooLarge, InputError

Node = tuple[int, int]  # (level, pos); children of (l, p) are (l+1, 4p + c)

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class ImageGrid:
    """Square grayscale image, side a power of two, pixel values in [0, 1]."""

    pixels: np.ndarray

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


def image_grid(pixels) -> ImageGrid:
    a = np.asarray(pixels, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InputError(f"image must be square, got shape {a.shape}")
    side = a.shape[0]
    if side < 1 or side & (side - 1):
        raise InputError(f"image side must be a power of two, got {side}")
    if not np.all(np.isfinite(a)):
        raise InputError("image has non-finite pixels")
    if a.min() < -1e-9 or a.max() > 1.0 + 1e-9:
        raise InputError(f"pixel values must lie in [0, 1], got [{a.min()}, {a.max()}]")
    a = np.clip(a, 0.0, 1.0)
    a.setflags(write=False)
    return ImageGrid(pixels=a)


def _split(block: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    lo0 = (block[0::2, :] + block[1::2, :]) / _SQRT2
    hi0 = (block[0::2, :] - block[1::2, :]) / _SQRT2
    ll = (lo0[:, 0::2] + lo0[:, 1::2]) / _SQRT2
    lh = (lo0[:, 0::2] - lo0[:, 1::2]) / _SQRT2
    hl = (hi0[:, 0::2] + hi0[:, 1::2]) / _SQRT2
    hh = (hi0[:, 0::2] - hi0[:, 1::2]) / _SQRT2
    return ll, lh, hl, hh


def _merge(ll, lh, hl, hh) -> np.ndarray:
    n = ll.shape[0]
    lo0 = np.empty((n, 2 * n))
    lo0[:, 0::2] = (ll + lh) / _SQRT2
    lo0[:, 1::2] = (ll - lh) / _SQRT2
    hi0 = np.empty((n, 2 * n))
    hi0[:, 0::2] = (hl + hh) / _SQRT2
    hi0[:, 1::2] = (hl - hh) / _SQRT2
    out = np.empty((2 * n, 2 * n))
    out[0::2, :] = (lo0 + hi0) / _SQRT2
    out[1::2, :] = (lo0 - hi0) / _SQRT2
    return out


@dataclass(frozen=True)
class WaveletPacketTree:
    depth: int
    side: int
    nodes: dict[Node, np.ndarray]

    def block(self, node: Node) -> np.ndarray:
        return self.nodes[node]

    def level_nodes(self, level: int) -> list[Node]:
        return [(level, p) for p in range(4**level)]

    def leaf_antichain(self) -> list[Node]:
        return self.level_nodes(self.depth)


def haar_wpt(image: ImageGrid, depth: int) -> WaveletPacketTree:
    """Full wavelet-packet quad-tree of the image down to `depth` levels."""
    if depth < 1:
        raise InputError(f"depth must be >= 1, got {depth}")
    if image.side % (2**depth) != 0 or 2**depth > image.side:
        raise DepthTooLarge(f"side {image.side} is not divisible by 2^{depth}")
    nodes: dict[Node, np.ndarray] = {(0, 0): np.array(image.pixels, dtype=np.float64)}
    for level in range(depth):
        for pos in range(4**level):
            children = _split(nodes[(level, pos)])
            for c, blk in enumerate(children):
                nodes[(level + 1, 4 * pos + c)] = blk
    return WaveletPacketTree(depth=depth, side=image.side, nodes=nodes)


@dataclass(frozen=True)
class BasisSelection:
    """A maximal anti-chain of the quad-tree: one orthonormal basis."""

    nodes: tuple[Node, ...]
    cost: float = math.nan


def _check_antichain(nodes, depth: int) -> tuple[Node, ...]:
    chosen = sorted(set((int(l), int(p)) for l, p in nodes))
    covered = 0
    seen_prefix = set()
    for level, pos in chosen:
        if not 0 <= level <= depth or not 0 <= pos < 4**level:
            raise InputError(f"node ({level}, {pos}) outside a depth-{depth} tree")
        # ancestors are the base-4 prefixes of pos
        for up in range(1, level + 1):
            if (level - up, pos >> (2 * up)) in seen_prefix:
                raise InputError(f"node ({level}, {pos}) has a selected ancestor")
        seen_prefix.add((level, pos))
        covered += 4 ** (depth - level)
    if covered != 4**depth:
        raise InputError("selection does not cover the tree (not a maximal anti-chain)")
    return tuple(chosen)


def inverse_wpt(
    selection: BasisSelection,
    coefficients: dict[Node, np.ndarray],
    side: int,
    depth: int,
) -> ImageGrid:
    """Orthonormal reconstruction from the blocks of one maximal anti-chain."""
    nodes = _check_antichain(selection.nodes, depth)

    def rebuild(level: int, pos: int) -> np.ndarray:
        if (level, pos) in coefficients and (level, pos) in set(nodes):
            return np.asarray(coefficients[(level, pos)], dtype=np.float64)
        kids = [rebuild(level + 1, 4 * pos + c) for c in range(4)]
        return _merge(*kids)

    out = rebuild(0, 0)
    out = np.clip(out, 0.0, 1.0)
    return ImageGrid(pixels=out)


def reconstruct(selection: BasisSelection, coefficients: dict[Node, np.ndarray],
                side: int, depth: int) -> np.ndarray:
    """Like inverse_wpt but without the [0,1] clamp: raw linear reconstruction."""
    nodes = set(_check_antichain(selection.nodes, depth))

    def rebuild(level: int, pos: int) -> np.ndarray:
        if (level, pos) in nodes:
            return np.asarray(coefficients[(level, pos)], dtype=np.float64)
        kids = [rebuild(level + 1, 4 * pos + c) for c in range(4)]
        return _merge(*kids)

    return rebuild(0, 0)


def shannon_cost(block: np.ndarray, total_energy: float) -> float:
    p = (np.abs(block) ** 2 / total_energy).reshape(-1)
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def l1_cost(block: np.ndarray, total_energy: float) -> float:
    return float(np.abs(block).sum())


_COSTS = {"shannon-entropy": shannon_cost, "l1": l1_cost}


def best_basis(tree: WaveletPacketTree, cost: str = "shannon-entropy") -> BasisSelection:
    """Minimal-cost maximal anti-chain by bottom-up dynamic programming."""
    if cost not in _COSTS:
        raise InputError(f"unknown cost {cost!r}; choose from {sorted(_COSTS)}")
    fn = _COSTS[cost]
    total_energy = float(np.sum(tree.nodes[(0, 0)] ** 2))
    if total_energy == 0.0:
        total_energy = 1.0  # all-zero image: every basis costs zero

    best_cost: dict[Node, float] = {}
    best_nodes: dict[Node, list[Node]] = {}
    for level in range(tree.depth, -1, -1):
        for pos in range(4**level):
            own = fn(tree.nodes[(level, pos)], total_energy)
            if level == tree.depth:
                best_cost[(level, pos)] = own
                best_nodes[(level, pos)] = [(level, pos)]
                continue
            kids = [(level + 1, 4 * pos + c) for c in range(4)]
            child_cost = sum(best_cost[k] for k in kids)
            if own <= child_cost:
                best_cost[(level, pos)] = own
                best_nodes[(level, pos)] = [(level, pos)]
            else:
                best_cost[(level, pos)] = child_cost
                best_nodes[(level, pos)] = list(
                    itertools.chain.from_iterable(best_nodes[k] for k in kids)
                )
    return BasisSelection(nodes=tuple(sorted(best_nodes[(0, 0)])), cost=best_cost[(0, 0)])


def enumerate_antichains(depth: int) -> list[tuple[Node, ...]]:
    """Every maximal anti-chain of a depth-d quad-tree (exhaustive oracle).

    Counts follow c(d) = 1 + c(d-1)^4: 2 at depth 1, 17 at depth 2,
    83522 at depth 3 -- callers keep depth <= 2.
    """
    if depth < 0:
        raise InputError("depth must be >= 0")

    def chains(level: int, pos: int) -> list[tuple[Node, ...]]:
        if level == depth:
            return [((level, pos),)]
        out = [((level, pos),)]
        kid_chains = [chains(level + 1, 4 * pos + c) for c in range(4)]
        for combo in itertools.product(*kid_chains):
            out.append(tuple(itertools.chain.from_iterable(combo)))
        return out

    return chains(0, 0)


@dataclass(frozen=True)
class CompressionResult:
    """Kept coefficients of one sparse representation plus its statistics."""

    class_label: int
    selection: BasisSelection
    kept: dict[tuple[int, int, int], float]  # (level, pos, flat index) -> value
    sparsity_fraction: float
    relative_error: float
    parameters: dict = field(default_factory=dict)


def _selection_coefficients(tree: WaveletPacketTree, selection: BasisSelection):
    return {node: tree.nodes[node] for node in selection.nodes}


def _result_from_kept(image, tree, selection, kept, class_label, params) -> CompressionResult:
    side, depth = tree.side, tree.depth
    blocks = {
        node: np.zeros_like(tree.nodes[node]) for node in selection.nodes
    }
    for (level, pos, idx), value in kept.items():
        blk = blocks[(level, pos)]
        blk.reshape(-1)[idx] = value
    recon = reconstruct(selection, blocks, side, depth)
    orig = image.pixels
    denom = float(np.linalg.norm(orig))
    rel = float(np.linalg.norm(recon - orig) / denom) if denom > 0 else 0.0
    return CompressionResult(
        class_label=class_label,
        selection=selection,
        kept=kept,
        sparsity_fraction=len(kept) / orig.size,
        relative_error=rel,
        parameters=params,
    )


def compress_class(
    image: ImageGrid,
    class_label: int,
    depth: int = 4,
    keep_fraction: float = 0.20,
    large_threshold: float = 1e-1,
    medium_threshold: float = 1e-2,
    medium_keep_prob: float = 0.5,
    seed: int = 0,
) -> CompressionResult:
    """The three sparse-representation classes over the depth-d packet tree.

    Class 1 works in the fixed basis of the terminal (depth-d) nodes:
    keep every coefficient above `large_threshold` in absolute value and,
    independently with probability `medium_keep_prob` (seeded), each
    coefficient between the two thresholds.  Classes 2 and 3 first select
    BestBasis under the entropy / l1 cost, then keep the largest
    `keep_fraction` of coefficients by absolute value (exact zeros are
    dropped from the kept set -- they contribute nothing).
    """
    if class_label not in (1, 2, 3):
        raise InputError(f"class must be 1, 2, or 3, got {class_label}")
    tree = haar_wpt(image, depth)

    if class_label == 1:
        if not 0.0 <= medium_keep_prob <= 1.0:
            raise InputError("medium keep probability must be in [0, 1]")
        if medium_threshold > large_threshold:
            raise InputError("medium threshold must not exceed the large threshold")
        rng = np.random.default_rng(seed)
        selection = BasisSelection(nodes=tuple(tree.leaf_antichain()))
        kept: dict[tuple[int, int, int], float] = {}
        for node in selection.nodes:
            flat = tree.nodes[node].reshape(-1)
            mag = np.abs(flat)
            draws = rng.random(flat.size)
            keep = (mag > large_threshold) | (
                (mag > medium_threshold) & (mag <= large_threshold) & (draws < medium_keep_prob)
            )
            for idx in np.flatnonzero(keep):
                kept[(node[0], node[1], int(idx))] = float(flat[idx])
        params = {
            "depth": depth,
            "large_threshold": large_threshold,
            "medium_threshold": medium_threshold,
            "medium_keep_prob": medium_keep_prob,
            "seed": seed,
        }
        return _result_from_kept(image, tree, selection, kept, 1, params)

    if not 0.0 <= keep_fraction <= 1.0:
        raise InputError(f"keep fraction must be in [0, 1], got {keep_fraction}")
    cost = "shannon-entropy" if class_label == 2 else "l1"
    selection = best_basis(tree, cost)
    entries = []
    for node in selection.nodes:
        flat = tree.nodes[node].reshape(-1)
        for idx, value in enumerate(flat):
            entries.append((-abs(value), node[0], node[1], idx, float(value)))
    entries.sort()
    n_keep = math.floor(keep_fraction * image.pixels.size)
    kept = {
        (level, pos, idx): value
        for _, level, pos, idx, value in entries[:n_keep]
        if value != 0.0
    }
    params = {"depth": depth, "keep_fraction": keep_fraction, "cost": cost}
    return _result_from_kept(image, tree, selection, kept, class_label, params)


def synthetic_blobs(side: int = 256, seed: int = 0) -> ImageGrid:
    """Deterministic binary blob image: thresholded smoothed Gaussian noise.

    Stand-in for the Matlab demo image the compression figures were
    produced from (which is not redistributable); blob scale follows the
    image side so the 256 x 256 default looks comparable.
    """
    if side < 4 or side & (side - 1):
        raise InputError(f"side must be a power of two >= 4, got {side}")
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((side, side))
    # blob scale side/8 keeps the depth-4 leaf basis sparse on the result
    smooth = gaussian_filter(noise, sigma=side / 8.0, mode="wrap")
    return image_grid((smooth > np.median(smooth)).astype(np.float64))
