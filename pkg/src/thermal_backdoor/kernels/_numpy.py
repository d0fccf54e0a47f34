"""Vectorised numpy kernels. Reference path, also used when numba is off."""
import numpy as np

from ._common import as_boxes, detection_order

NAME = "numpy"


def iou_matrix(a, b):
    """Pairwise IoU of two (N, 4) / (M, 4) arrays of ``cx, cy, w, h`` boxes."""
    a = as_boxes(a)
    b = as_boxes(b)
    ax0 = a[:, 0] - a[:, 2] / 2.0
    ax1 = a[:, 0] + a[:, 2] / 2.0
    ay0 = a[:, 1] - a[:, 3] / 2.0
    ay1 = a[:, 1] + a[:, 3] / 2.0
    bx0 = b[:, 0] - b[:, 2] / 2.0
    bx1 = b[:, 0] + b[:, 2] / 2.0
    by0 = b[:, 1] - b[:, 3] / 2.0
    by1 = b[:, 1] + b[:, 3] / 2.0
    iw = np.minimum(ax1[:, None], bx1[None, :]) - np.maximum(ax0[:, None], bx0[None, :])
    ih = np.minimum(ay1[:, None], by1[None, :]) - np.maximum(ay0[:, None], by0[None, :])
    inter = np.where((iw > 0.0) & (ih > 0.0), iw * ih, 0.0)
    area_a = (ax1 - ax0) * (ay1 - ay0)
    area_b = (bx1 - bx0) * (by1 - by0)
    union = area_a[:, None] + area_b[None, :] - inter
    out = np.zeros_like(inter)
    np.divide(inter, union, out=out, where=union > 0.0)
    return out


def greedy_match(iou, confidence, threshold):
    """Confidence-ordered one-to-one matching.

    ``iou`` has shape (n_gt, n_det). Returns an int array of length n_det with
    the matched ground-truth index or -1.
    """
    iou = np.asarray(iou, dtype=np.float64)
    n_gt, n_det = iou.shape
    det_to_gt = np.full(n_det, -1, dtype=np.int64)
    if n_gt == 0 or n_det == 0:
        return det_to_gt
    taken = np.zeros(n_gt, dtype=bool)
    for d in detection_order(iou, confidence):
        col = np.where(taken | (iou[:, d] < threshold), -1.0, iou[:, d])
        g = int(np.argmax(col))  # first max wins ties
        if col[g] >= threshold:
            taken[g] = True
            det_to_gt[d] = g
    return det_to_gt


def radius_mask(points, a, b, r):
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    dx = points[:, 0] - a
    dy = points[:, 1] - b
    return np.sqrt(dx * dx + dy * dy) <= r


def _axis_hits(lo, hi, extent, grid):
    i = np.arange(grid, dtype=np.float64)
    c0 = i * extent / grid
    c1 = (i + 1.0) * extent / grid
    return (lo[..., None] < c1) & (c0 < hi[..., None])


def shared_cells(trigger, rects, width, height, grid):
    """Count grid cells that intersect both the trigger rect and each object rect.

    Rects are ``x0, y0, x1, y1`` in pixels, half-open; a cell counts when its
    overlap with a rect has positive area.
    """
    t = np.asarray(trigger, dtype=np.float64).reshape(4)
    rects = np.asarray(rects, dtype=np.float64).reshape(-1, 4)
    tx = _axis_hits(t[0:1], t[2:3], width, grid)[0]
    ty = _axis_hits(t[1:2], t[3:4], height, grid)[0]
    ox = _axis_hits(rects[:, 0], rects[:, 2], width, grid)
    oy = _axis_hits(rects[:, 1], rects[:, 3], height, grid)
    return (ox & tx).sum(axis=1).astype(np.int64) * (oy & ty).sum(axis=1).astype(np.int64)


def fill_rects(pixels, rects, values):
    """Return a copy of ``pixels`` with each ``left, top, w, h`` rect overwritten in order.

    Rects are clipped to the image.
    """
    out = np.array(pixels, dtype=np.uint8, copy=True)
    rects = np.asarray(rects, dtype=np.int64).reshape(-1, 4)
    values = np.asarray(values, dtype=np.uint8).reshape(-1)
    for (left, top, w, h), v in zip(rects, values):
        out[max(top, 0):max(top + h, 0), max(left, 0):max(left + w, 0)] = v
    return out


def all_point_ap(tp, n_gt):
    """Area under the precision envelope for a ranked list of TP flags."""
    tp = np.asarray(tp, dtype=bool)
    if n_gt <= 0 or tp.size == 0:
        return 0.0
    ctp = np.cumsum(tp, dtype=np.float64)
    rank = np.arange(1, tp.size + 1, dtype=np.float64)
    precision = ctp / rank
    recall = ctp / n_gt
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    prev = np.concatenate(([0.0], recall[:-1]))
    return float(np.sum((recall - prev) * envelope))
