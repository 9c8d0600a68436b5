"""Independent reference implementations used only to check the library.

These deliberately use different algorithms from the package: breadth-first
flood fill instead of run-based union-find, and Kuhn's augmenting-path
matching instead of greedy IoU pairing.
"""

from __future__ import annotations

from collections import deque

import numpy as np


def flood_fill_boxes(mask: np.ndarray, connectivity: int) -> list[tuple[int, int, int, int, int]]:
    """(x_min, y_min, width, height, area) per component, sorted by (y_min, x_min)."""
    mask = np.asarray(mask).astype(bool)
    height, width = mask.shape
    seen = np.zeros_like(mask)
    if connectivity == 8:
        steps = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        steps = [(-1, 0), (1, 0), (0, -1), (0, 1)]

    results = []
    for sy in range(height):
        for sx in range(width):
            if not mask[sy, sx] or seen[sy, sx]:
                continue
            queue = deque([(sy, sx)])
            seen[sy, sx] = True
            x0 = x1 = sx
            y0 = y1 = sy
            area = 0
            while queue:
                y, x = queue.popleft()
                area += 1
                x0, x1 = min(x0, x), max(x1, x)
                y0, y1 = min(y0, y), max(y1, y)
                for dy, dx in steps:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < height and 0 <= nx < width and mask[ny, nx] and not seen[ny, nx]:
                        seen[ny, nx] = True
                        queue.append((ny, nx))
            results.append((x0, y0, x1 - x0 + 1, y1 - y0 + 1, area))
    results.sort(key=lambda r: (r[1], r[0]))
    return results


def max_matching_count(adjacency: list[list[int]], n_right: int) -> int:
    """Maximum-cardinality bipartite matching size (Kuhn's algorithm)."""
    match_right = [-1] * n_right

    def try_augment(left: int, visited: list[bool]) -> bool:
        for right in adjacency[left]:
            if visited[right]:
                continue
            visited[right] = True
            if match_right[right] == -1 or try_augment(match_right[right], visited):
                match_right[right] = left
                return True
        return False

    size = 0
    for left in range(len(adjacency)):
        if try_augment(left, [False] * n_right):
            size += 1
    return size


def alpha_hull_xywh(alpha: np.ndarray) -> tuple[int, int, int, int]:
    """Tight (x, y, w, h) hull of the True cells; assumes at least one."""
    ys, xs = np.nonzero(alpha)
    return int(xs.min()), int(ys.min()), int(xs.max() - xs.min() + 1), int(ys.max() - ys.min() + 1)
