"""Exhaustive enumeration of symmetric mode sets inside a small box.

A symmetric origin-free set inside the box |k1|, |k2| <= b is a union of
antipodal classes {k, -k}; the box of size b=3 has 24 classes, hence
2^24 symmetric subsets.  Two census jobs are supported:

* listing every degenerate set (they are exactly the symmetric subsets of
  a maximal circle or maximal line inside the box, so the family is tiny);
* verifying, for every non-degenerate set, that some mode outside the set
  is the sum of exactly one non-degenerate pair of members.  This runs as
  a vectorized bit-parallel scan over chunks of set bitmasks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .modesets import Mode, ModeSet, _primitive_direction, pair_class, PairClass


def box_classes(box: int) -> list[Mode]:
    """Antipodal class representatives in the box, k1 > 0 or (k1 == 0 and
    k2 > 0), in lexicographic order."""
    reps = []
    for a in range(0, box + 1):
        for b in range(-box, box + 1):
            if (a, b) == (0, 0):
                continue
            if a > 0 or b > 0:
                reps.append((a, b))
    return sorted(reps)


def mask_to_set(mask: int, classes: list[Mode]) -> ModeSet:
    members = []
    for i, k in enumerate(classes):
        if mask >> i & 1:
            members.append(k)
            members.append((-k[0], -k[1]))
    return ModeSet.finite(members)


@dataclass(frozen=True)
class BoxCensus:
    """Precomputed pair structure of one box."""

    box: int
    classes: tuple
    degenerate_group_masks: tuple  # bitmasks of maximal circles and lines
    # non-degenerate unordered point pairs grouped by canonical sum
    sums: tuple  # of (sum_mode, class_of_sum_or_None, ((i, j), ...))


def build_census(box: int) -> BoxCensus:
    classes = box_classes(box)
    index = {k: i for i, k in enumerate(classes)}

    # maximal degenerate groups: circles (shared |k|^2) and lines (shared
    # primitive direction)
    circles: dict[int, int] = {}
    lines: dict[Mode, int] = {}
    for i, k in enumerate(classes):
        circles.setdefault(k[0] ** 2 + k[1] ** 2, 0)
        circles[k[0] ** 2 + k[1] ** 2] |= 1 << i
        d = _primitive_direction(k)
        lines.setdefault(d, 0)
        lines[d] |= 1 << i
    groups = tuple(sorted(set(circles.values()) | set(lines.values())))

    # all unordered non-degenerate point pairs, reduced by the global
    # k -> -k symmetry: keep the representative whose sum is canonical
    points = []
    for k in classes:
        points.append(k)
        points.append((-k[0], -k[1]))
    sums: dict[Mode, list] = {}
    seen = set()
    for k, l in itertools.combinations(points, 2):
        if pair_class(k, l) is not PairClass.NON_DEGENERATE:
            continue
        m = (k[0] + l[0], k[1] + l[1])
        # m = 0 needs l = -k, which is degenerate
        canonical = m if (m[0], m[1]) > (0, 0) else None
        if canonical is None:
            # mirror pair handles it; count under -m
            m = (-m[0], -m[1])
            k, l = (-k[0], -k[1]), (-l[0], -l[1])
        key = (m, tuple(sorted((k, l))))
        if key in seen:
            continue
        seen.add(key)
        i = index[k] if k in index else index[(-k[0], -k[1])]
        j = index[l] if l in index else index[(-l[0], -l[1])]
        sums.setdefault(m, []).append((i, j))
    sum_entries = []
    for m in sorted(sums):
        cls_idx = index.get(m)  # None when the sum leaves the half box
        sum_entries.append((m, cls_idx, tuple(sums[m])))
    return BoxCensus(box, tuple(classes), groups, tuple(sum_entries))


def degenerate_sets(census: BoxCensus) -> list[ModeSet]:
    """Every nonempty degenerate symmetric set inside the box."""
    seen = set()
    out = []
    for g in census.degenerate_group_masks:
        bits = [i for i in range(len(census.classes)) if g >> i & 1]
        for r in range(1, len(bits) + 1):
            for combo in itertools.combinations(bits, r):
                mask = 0
                for i in combo:
                    mask |= 1 << i
                if mask not in seen:
                    seen.add(mask)
                    out.append(mask_to_set(mask, list(census.classes)))
    return out


def is_degenerate_mask(mask: int, census: BoxCensus) -> bool:
    if mask == 0:
        return True
    return any(mask & ~g == 0 for g in census.degenerate_group_masks)


def scan_witnesses(census: BoxCensus, chunk_bits: int = 20):
    """Bit-parallel scan of every symmetric set in the box.

    For each set bitmask decides (a) degeneracy and (b) existence of a
    mode outside the set that is the sum of exactly one non-degenerate
    member pair.  Returns (n_degenerate, n_nondegenerate, n_failures,
    failing_masks): a failure is a non-degenerate set without a witness.
    """
    n_cls = len(census.classes)
    total = 1 << n_cls
    chunk = 1 << min(chunk_bits, n_cls)
    n_deg = 0
    n_nondeg = 0
    failures = []
    groups = np.array(census.degenerate_group_masks, dtype=np.uint32)
    for start in range(0, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        deg = masks == 0
        for g in groups:
            deg |= (masks & ~g) == 0
        found = np.zeros(masks.shape, dtype=bool)
        for m, cls_idx, pairs in census.sums:
            count = np.zeros(masks.shape, dtype=np.uint16)
            for (i, j) in pairs:
                count += ((masks >> np.uint32(i)) & (masks >> np.uint32(j)) & 1).astype(
                    np.uint16
                )
            ok = count == 1
            if cls_idx is not None:
                ok &= ((masks >> np.uint32(cls_idx)) & 1) == 0
            found |= ok
        n_deg += int(np.count_nonzero(deg))
        n_nondeg += int(np.count_nonzero(~deg))
        bad = ~deg & ~found
        if np.any(bad):
            failures.extend(int(m) for m in masks[bad])
    return n_deg, n_nondeg, len(failures), failures
