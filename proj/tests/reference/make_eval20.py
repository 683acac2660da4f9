#!/usr/bin/env python3
"""Builds the 20-instance evaluation fixture and freezes reference numbers.

AP, mAP and AR come from pycocotools (bbox protocol, area range "all",
maxDets 100). Best-F1 precision/recall at IoU 0.50 are recomputed here from
the per-image matches pycocotools reports.

Usage: make_eval20.py OUTPUT_DIR
"""
import contextlib
import io
import json
import os
import sys

import numpy as np
from pycocotools.coco import COCO
from pycocotools.cocoeval import COCOeval

W = H = 400

# (image, category, x, y, w, h)
GT = [
    # category 1 "A": 10 instances
    (1, 1, 20, 20, 100, 60), (1, 1, 200, 30, 120, 80), (1, 1, 40, 200, 80, 80),
    (2, 1, 10, 10, 150, 50), (2, 1, 220, 220, 90, 120),
    (3, 1, 30, 40, 70, 70), (3, 1, 150, 150, 100, 100), (3, 1, 300, 20, 60, 90),
    (4, 1, 50, 50, 200, 40), (4, 1, 60, 300, 120, 60),
    # category 2 "B": 8 instances
    (1, 2, 250, 250, 100, 100), (1, 2, 20, 320, 60, 40),
    (2, 2, 30, 120, 100, 100), (2, 2, 200, 60, 80, 50),
    (3, 2, 40, 260, 140, 90), (3, 2, 260, 300, 80, 60),
    (4, 2, 280, 120, 90, 90), (4, 2, 280, 260, 70, 110),
    # category 3 "C": 2 instances
    (1, 3, 150, 150, 40, 40), (2, 3, 150, 300, 40, 40),
]


def shifted(box, iou):
    """Same-size box shifted right so that IoU with `box` equals `iou`."""
    x, y, w, h = box
    dx = w * (1.0 - iou) / (1.0 + iou)
    return [x + dx, y, w, h]


def gt_box(i):
    return list(GT[i][2:])


# (gt index, iou) or (image, explicit box), then category and score
DETS = [
    # A: a spread of localization qualities, a duplicate and misses
    (0, 0.97, 1, 0.99), (1, 0.91, 1, 0.95), (2, 0.83, 1, 0.93),
    (3, 0.78, 1, 0.88), (4, 0.68, 1, 0.86), (5, 0.57, 1, 0.81),
    (6, 0.52, 1, 0.74), (0, 0.62, 1, 0.72),  # duplicate on GT 0
    ((1, [330, 330, 50, 50]), None, 1, 0.69),      # background FP on image 1
    (7, 0.41, 1, 0.64),                       # below every threshold
    (8, 0.88, 1, 0.46),
    # GT 9 is missed
    # B: includes a class confusion (B predicted on an A box)
    (10, 0.96, 2, 0.98), (11, 0.73, 2, 0.91), (12, 0.87, 2, 0.84),
    ((1, [40, 200, 80, 80]), None, 2, 0.79),       # sits on an A instance of image 1
    (13, 0.93, 2, 0.77), (14, 0.54, 2, 0.66), (15, 0.81, 2, 0.58),
    (16, 0.64, 2, 0.41), ((3, [10, 10, 30, 30]), None, 2, 0.37),
    # GT 17 is missed
    # C: ranked [TP, FP, TP] over 2 ground truths
    (18, 1.0, 3, 0.97), ((1, [300, 20, 40, 40]), None, 3, 0.55), (19, 1.0, 3, 0.33),
]


def build(out_dir):
    images = [{"id": i, "file_name": f"page{i}.jpg", "width": W, "height": H, "split": "test"} for i in range(1, 5)]
    categories = [{"id": 1, "name": "A"}, {"id": 2, "name": "B"}, {"id": 3, "name": "C"}]
    annotations = []
    for k, (img, cat, x, y, w, h) in enumerate(GT):
        annotations.append({"id": k + 1, "image_id": img, "category_id": cat, "bbox": [x, y, w, h],
                            "area": w * h, "iscrowd": 0})
    dataset = {"info": {"corpus_id": "merged"}, "images": images, "categories": categories,
               "annotations": annotations}
    dets = []
    for g, geom, cat, score in DETS:
        if isinstance(g, tuple):
            img, box = g
        else:
            box = gt_box(g) if geom == 1.0 else shifted(gt_box(g), geom)
            img = GT[g][0]
        dets.append({"image_id": img, "category_id": cat, "bbox": [round(v, 10) for v in box], "score": score})
    with open(os.path.join(out_dir, "dataset.json"), "w") as f:
        json.dump(dataset, f, indent=1)
        f.write("\n")
    with open(os.path.join(out_dir, "detections.json"), "w") as f:
        json.dump(dets, f, indent=1)
        f.write("\n")
    return dataset, dets


def best_f1(scores, tps, n_gt):
    order = np.argsort(-np.asarray(scores), kind="mergesort")
    s = np.asarray(scores)[order]
    tp = np.cumsum(np.asarray(tps, dtype=float)[order])
    best = (0.0, 0.0, 0.0)
    for i in range(len(s)):
        if i + 1 < len(s) and s[i + 1] == s[i]:
            continue
        p = tp[i] / (i + 1)
        r = tp[i] / n_gt
        f = 2 * p * r / (p + r) if p + r > 0 else 0.0
        if f > best[0]:
            best = (f, p, r)
    return best[1], best[2]


def evaluate(out_dir):
    with contextlib.redirect_stdout(io.StringIO()):
        gt = COCO(os.path.join(out_dir, "dataset.json"))
        dt = gt.loadRes(os.path.join(out_dir, "detections.json"))
        ev = COCOeval(gt, dt, "bbox")
        ev.params.maxDets = [1, 10, 100]
        ev.evaluate()
        ev.accumulate()
        ev.summarize()
    prec = ev.eval["precision"]  # T x R x K x A x M
    rec = ev.eval["recall"]      # T x K x A x M
    cats = ev.params.catIds
    per = {}
    for k, cid in enumerate(cats):
        name = gt.cats[cid]["name"]
        ap_t = [float(np.mean(prec[t, :, k, 0, 2])) for t in range(prec.shape[0])]
        ar = float(np.mean(rec[:, k, 0, 2]))
        # best-F1 from pycocotools' own per-image matches at IoU 0.50
        scores, tps, n_gt = [], [], 0
        for e in ev.evalImgs:
            if e is None or e["category_id"] != cid or e["aRng"] != ev.params.areaRng[0]:
                continue
            n_gt += int(np.sum(e["gtIgnore"] == 0))
            scores += list(e["dtScores"])
            tps += [bool(m > 0) for m in e["dtMatches"][0]]
        p, r = best_f1(scores, tps, n_gt)
        per[name] = {"ap": ap_t, "ap_50_95": float(np.mean(ap_t)), "ap_50": ap_t[0], "ar": ar,
                     "precision": float(p), "recall": float(r), "n_gt": n_gt}
    names = list(per)
    expected = {
        "map_50_95": float(ev.stats[0]),
        "map_50": float(ev.stats[1]),
        "ar": float(ev.stats[8]),
        "precision": float(np.mean([per[n]["precision"] for n in names])),
        "recall": float(np.mean([per[n]["recall"] for n in names])),
        "categories": per,
    }
    with open(os.path.join(out_dir, "expected.json"), "w") as f:
        json.dump(expected, f, indent=1)
        f.write("\n")
    return expected


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    build(out)
    print(json.dumps(evaluate(out), indent=1))
