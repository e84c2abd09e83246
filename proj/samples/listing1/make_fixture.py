# Copyright 2026 The sgeval Authors
# SPDX-License-Identifier: Apache-2.0
"""Regenerates the example submission in this directory.

The prediction file follows the documented example (image 123, first
instance bbox [1, 22, 333, 44.4] of category 2, leading triplets [0, 3, 34]
and [2, 0, 13]) with the elided instances filled in. Masks are written with
tifffile and Pillow so the fixture does not depend on the library's own
writers.
"""

import json
from pathlib import Path

import numpy as np
import tifffile
from PIL import Image

HERE = Path(__file__).resolve().parent
WIDTH, HEIGHT, COLS, ROWS = 400, 300, 7, 5
COUNT = COLS * ROWS


def cell(i):
    cw, ch = WIDTH // COLS, HEIGHT // ROWS
    x, y = (i % COLS) * cw, (i // COLS) * ch
    return x + 4, y + 4, x + cw - 4, y + ch - 4


def main():
    index = np.zeros((HEIGHT, WIDTH), dtype=np.uint16)
    pages = np.zeros((COUNT, HEIGHT, WIDTH), dtype=np.uint8)
    instances = []
    for i in range(COUNT):
        x1, y1, x2, y2 = cell(i)
        index[y1:y2, x1:x2] = i + 1
        pages[i, y1:y2, x1:x2] = 255
        instances.append({"bbox": [x1, y1, x2, y2], "category": i % 3})
    pred_instances = [dict(inst) for inst in instances]
    pred_instances[0] = {"bbox": [1, 22, 333, 44.4], "category": 2}
    instances[0]["category"] = 2

    Image.fromarray(index).save(HERE / "gt_123.png")
    tifffile.imwrite(HERE / "seg_file.tiff", pages, compression="zlib", photometric="minisblack")

    gt = {
        "version": 1,
        "predicate_classes": ["on", "holding", "near", "beside"],
        "instance_classes": ["person", "cup", "table"],
        "images": [{
            "id": 123, "width": WIDTH, "height": HEIGHT, "seg_filename": "gt_123.png",
            "instances": instances,
            "triplets": [[0, 3, 34], [2, 0, 13], [5, 1, 6], [7, 2, 8]],
        }],
    }
    pred = {
        "version": 1,
        "images": [{
            "id": 123, "seg_filename": "seg_file.tiff",
            "instances": pred_instances,
            "triplets": [[0, 3, 34], [2, 0, 13], [5, 2, 6], [5, 1, 6], [9, 0, 10]],
        }],
    }
    (HERE / "gt.json").write_text(json.dumps(gt, indent=1) + "\n")
    (HERE / "pred.json").write_text(json.dumps(pred, indent=1) + "\n")


if __name__ == "__main__":
    main()
