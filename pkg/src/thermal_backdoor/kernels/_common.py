import numpy as np


def as_boxes(boxes):
    return np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))


def detection_order(iou, confidence):
    """Processing order: confidence desc, best IoU desc, input order."""
    confidence = np.asarray(confidence, dtype=np.float64)
    best = iou.max(axis=0) if iou.shape[0] else np.zeros(iou.shape[1])
    idx = np.arange(confidence.size)
    return np.lexsort((idx, -best, -confidence))
