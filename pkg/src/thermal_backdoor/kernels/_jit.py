"""numba-compiled kernels with the same signatures as the numpy path."""
import math

import numpy as np
from numba import njit

from ._common import as_boxes, detection_order

NAME = "numba"


@njit(cache=True)
def _iou_core(a, b):
    n = a.shape[0]
    m = b.shape[0]
    out = np.zeros((n, m))
    for i in range(n):
        ax0 = a[i, 0] - a[i, 2] / 2.0
        ax1 = a[i, 0] + a[i, 2] / 2.0
        ay0 = a[i, 1] - a[i, 3] / 2.0
        ay1 = a[i, 1] + a[i, 3] / 2.0
        area_a = (ax1 - ax0) * (ay1 - ay0)
        for j in range(m):
            bx0 = b[j, 0] - b[j, 2] / 2.0
            bx1 = b[j, 0] + b[j, 2] / 2.0
            by0 = b[j, 1] - b[j, 3] / 2.0
            by1 = b[j, 1] + b[j, 3] / 2.0
            iw = min(ax1, bx1) - max(ax0, bx0)
            ih = min(ay1, by1) - max(ay0, by0)
            if iw <= 0.0 or ih <= 0.0:
                continue
            inter = iw * ih
            area_b = (bx1 - bx0) * (by1 - by0)
            union = area_a + area_b - inter
            if union > 0.0:
                out[i, j] = inter / union
    return out


def iou_matrix(a, b):
    return _iou_core(as_boxes(a), as_boxes(b))


@njit(cache=True)
def _greedy_core(iou, order, threshold):
    n_gt = iou.shape[0]
    n_det = iou.shape[1]
    det_to_gt = np.full(n_det, -1, dtype=np.int64)
    taken = np.zeros(n_gt, dtype=np.bool_)
    for k in range(order.shape[0]):
        d = order[k]
        best = -1
        best_iou = -1.0
        for g in range(n_gt):
            if taken[g] or iou[g, d] < threshold:
                continue
            if iou[g, d] > best_iou:
                best_iou = iou[g, d]
                best = g
        if best >= 0:
            taken[best] = True
            det_to_gt[d] = best
    return det_to_gt


def greedy_match(iou, confidence, threshold):
    iou = np.ascontiguousarray(np.asarray(iou, dtype=np.float64))
    n_gt, n_det = iou.shape
    if n_gt == 0 or n_det == 0:
        return np.full(n_det, -1, dtype=np.int64)
    order = detection_order(iou, confidence).astype(np.int64)
    return _greedy_core(iou, order, float(threshold))


@njit(cache=True)
def _radius_core(points, a, b, r):
    n = points.shape[0]
    out = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        dx = points[i, 0] - a
        dy = points[i, 1] - b
        out[i] = math.sqrt(dx * dx + dy * dy) <= r
    return out


def radius_mask(points, a, b, r):
    points = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))
    return _radius_core(points, float(a), float(b), float(r))


@njit(cache=True)
def _axis_count(t0, t1, o0, o1, extent, grid):
    count = 0
    for i in range(grid):
        c0 = i * extent / grid
        c1 = (i + 1.0) * extent / grid
        if t0 < c1 and c0 < t1 and o0 < c1 and c0 < o1:
            count += 1
    return count


@njit(cache=True)
def _shared_core(t, rects, width, height, grid):
    n = rects.shape[0]
    out = np.zeros(n, dtype=np.int64)
    for k in range(n):
        nx = _axis_count(t[0], t[2], rects[k, 0], rects[k, 2], width, grid)
        if nx == 0:
            continue
        ny = _axis_count(t[1], t[3], rects[k, 1], rects[k, 3], height, grid)
        out[k] = nx * ny
    return out


def shared_cells(trigger, rects, width, height, grid):
    t = np.ascontiguousarray(np.asarray(trigger, dtype=np.float64).reshape(4))
    rects = np.ascontiguousarray(np.asarray(rects, dtype=np.float64).reshape(-1, 4))
    return _shared_core(t, rects, float(width), float(height), int(grid))


@njit(cache=True)
def _fill_core(out, rects, values):
    h, w = out.shape
    for k in range(rects.shape[0]):
        x0 = max(rects[k, 0], 0)
        y0 = max(rects[k, 1], 0)
        x1 = min(rects[k, 0] + rects[k, 2], w)
        y1 = min(rects[k, 1] + rects[k, 3], h)
        v = values[k]
        for y in range(y0, y1):
            for x in range(x0, x1):
                out[y, x] = v
    return out


def fill_rects(pixels, rects, values):
    out = np.array(pixels, dtype=np.uint8, copy=True)
    rects = np.ascontiguousarray(np.asarray(rects, dtype=np.int64).reshape(-1, 4))
    values = np.ascontiguousarray(np.asarray(values, dtype=np.uint8).reshape(-1))
    return _fill_core(out, rects, values)


@njit(cache=True)
def _ap_core(tp, n_gt):
    k = tp.shape[0]
    precision = np.empty(k)
    recall = np.empty(k)
    hits = 0.0
    for i in range(k):
        if tp[i]:
            hits += 1.0
        precision[i] = hits / (i + 1.0)
        recall[i] = hits / n_gt
    for i in range(k - 2, -1, -1):
        if precision[i + 1] > precision[i]:
            precision[i] = precision[i + 1]
    ap = 0.0
    prev = 0.0
    for i in range(k):
        ap += (recall[i] - prev) * precision[i]
        prev = recall[i]
    return ap


def all_point_ap(tp, n_gt):
    tp = np.ascontiguousarray(np.asarray(tp, dtype=np.bool_))
    if n_gt <= 0 or tp.size == 0:
        return 0.0
    return float(_ap_core(tp, float(n_gt)))
