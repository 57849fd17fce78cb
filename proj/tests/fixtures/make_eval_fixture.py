#!/usr/bin/env python3
"""Builds the small evaluation cohort under fixtures/eval and, with --check,
verifies a JSON report against scipy's connected-component labelling.

    python3 make_eval_fixture.py            # (re)write volumes + manifest
    python3 make_eval_fixture.py --check eval/golden_joint.json joint
"""
import gzip
import json
import struct
import sys
from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent / "eval"
DIMS = (16, 14, 12)  # nx, ny, nz
SPACING = (2.0, 2.0, 3.0)
STUDIES = [
    ("mel01", "melanoma", 3),
    ("mel02", "melanoma", 1),
    ("lung01", "lung_cancer", 2),
    ("lym01", "lymphoma", 4),
    ("neg01", "negative", 0),
    ("neg02", "negative", 0),
]
MODELS = ["joint", "unet2d"]


def write_lbv(path, vol, kind):
    nx, ny, nz = DIMS
    header = b"LBV1" + struct.pack("<3I3fB", nx, ny, nz, *SPACING, kind)
    # Stored x fastest, z slowest: numpy array indexed [z, y, x].
    dtype = "<u1" if kind == 0 else "<f4"
    path.write_bytes(header + vol.astype(dtype).tobytes(order="C"))


def write_nifti_gz(path, vol):
    nx, ny, nz = DIMS
    hdr = bytearray(348)
    struct.pack_into("<i", hdr, 0, 348)
    struct.pack_into("<8h", hdr, 40, 3, nx, ny, nz, 1, 1, 1, 1)
    struct.pack_into("<hh", hdr, 70, 2, 8)  # uint8
    struct.pack_into("<8f", hdr, 76, 1.0, *SPACING, 0, 0, 0, 0)
    struct.pack_into("<f", hdr, 108, 352.0)
    hdr[123] = 2
    struct.pack_into("<hh", hdr, 252, 1, 1)
    struct.pack_into("<4f", hdr, 280, SPACING[0], 0, 0, 0)
    struct.pack_into("<4f", hdr, 296, 0, SPACING[1], 0, 0)
    struct.pack_into("<4f", hdr, 312, 0, 0, SPACING[2], 0)
    hdr[344:348] = b"n+1\0"
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(bytes(hdr) + b"\0\0\0\0" + vol.astype("<u1").tobytes(order="C"))


def blob(vol, z, y, x, r):
    zz, yy, xx = np.ogrid[: vol.shape[0], : vol.shape[1], : vol.shape[2]]
    region = (zz - z) ** 2 + (yy - y) ** 2 + (xx - x) ** 2 <= r * r
    vol[region] = 1
    return region


def build():
    rng = np.random.default_rng(20220917)
    HERE.mkdir(parents=True, exist_ok=True)
    for sub in ("gt", "joint", "unet2d"):
        (HERE / sub).mkdir(exist_ok=True)
    rows = []
    shape = (DIMS[2], DIMS[1], DIMS[0])
    for sid, disease, lesions in STUDIES:
        gt = np.zeros(shape, np.uint8)
        regions = [
            blob(gt, rng.integers(3, 10), rng.integers(3, 11), rng.integers(3, 13), rng.integers(1, 3))
            for _ in range(lesions)
        ]
        preds = {}
        for model, keep, noise, miss in (("joint", 0.8, 0.002, 0.2), ("unet2d", 0.6, 0.006, 0.4)):
            p = gt.copy()
            for region in regions:
                if rng.random() < miss:
                    p[region] = 0
            p[rng.random(shape) > keep] = 0
            p[rng.random(shape) < noise] = 1
            preds[model] = p
        write_nifti_gz(HERE / "gt" / f"{sid}.nii.gz", gt)
        write_lbv(HERE / "joint" / f"{sid}.lbv", preds["joint"], 0)
        write_lbv(HERE / "unet2d" / f"{sid}.lbv", preds["unet2d"], 0)
        rows.append(f"{sid},{disease},{lesions},gt/{sid}.nii.gz,joint/{sid}.lbv,unet2d/{sid}.lbv")
    (HERE / "manifest.csv").write_text("study_id,disease,lesion_count,gt_path,joint,unet2d\n" + "\n".join(rows) + "\n")


def load(path):
    raw = path.read_bytes()
    if path.suffix == ".gz":
        raw = gzip.decompress(raw)[352:]
    else:
        raw = raw[29:]
    return np.frombuffer(raw, np.uint8).reshape(DIMS[2], DIMS[1], DIMS[0])


def check(report_path, model):
    from scipy import ndimage

    structure = ndimage.generate_binary_structure(3, 2)  # 18-connectivity
    voxel_ml = SPACING[0] * SPACING[1] * SPACING[2] / 1000.0
    report = json.loads(Path(report_path).read_text())
    by_id = {s["study_id"]: s for s in report["studies"]}

    def unmatched(a, b):
        lab, n = ndimage.label(a, structure)
        return sum(int((lab == c).sum()) for c in range(1, n + 1) if not b[lab == c].any())

    ok = True
    for sid, _, _ in STUDIES:
        gt = load(HERE / "gt" / f"{sid}.nii.gz")
        pred = load(HERE / model / f"{sid}.lbv")
        got = by_id[sid]
        dsc = 2.0 * (pred & gt).sum() / (pred.sum() + gt.sum()) if gt.any() else None
        fpv = unmatched(pred, gt) * voxel_ml
        fnv = unmatched(gt, pred) * voxel_ml if gt.any() else 0.0
        same = (dsc is None) == (got["dsc"] is None) and (dsc is None or abs(dsc - got["dsc"]) < 1e-12)
        same = same and abs(fpv - got["fpv_ml"]) < 1e-9 and abs(fnv - got["fnv_ml"]) < 1e-9
        print(f"{sid}: dsc={dsc} fpv={fpv:.6f} fnv={fnv:.6f} {'ok' if same else 'MISMATCH'}")
        ok &= same
    return ok


if __name__ == "__main__":
    if len(sys.argv) > 1 and sys.argv[1] == "--check":
        sys.exit(0 if check(sys.argv[2], sys.argv[3]) else 1)
    build()
