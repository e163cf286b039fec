"""Convert the AwA2 ResNet-101 feature release (res101.mat, att_splits.mat)
into the files `zsl` reads: features.zslm, labels.txt, attributes.csv and
split.txt.

Only the trainval rows (seen classes) and test_unseen rows are written, which
is what the disjoint protocol needs.

    python scripts/prepare_awa2.py --mat-dir xlsa17/data/AWA2 --out-dir data/awa2
"""

import argparse
import pathlib
import struct

import numpy as np
import scipy.io


def write_zslm(path, m):
    m = np.ascontiguousarray(m, dtype="<f4")
    with open(path, "wb") as f:
        f.write(b"ZSLM")
        f.write(struct.pack("<II", m.shape[0], m.shape[1]))
        f.write(m.tobytes())


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mat-dir", required=True, type=pathlib.Path)
    ap.add_argument("--out-dir", required=True, type=pathlib.Path)
    args = ap.parse_args()

    res = scipy.io.loadmat(args.mat_dir / "res101.mat")
    att = scipy.io.loadmat(args.mat_dir / "att_splits.mat")

    features = res["features"].T.astype(np.float64)
    labels = res["labels"].ravel().astype(np.int64) - 1
    seen_rows = att["trainval_loc"].ravel() - 1
    unseen_rows = att["test_unseen_loc"].ravel() - 1
    rows = np.concatenate([seen_rows, unseen_rows])

    seen = sorted(set(labels[seen_rows].tolist()))
    unseen = sorted(set(labels[unseen_rows].tolist()))
    if set(seen) & set(unseen):
        raise SystemExit("seen and unseen classes overlap")

    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    write_zslm(out / "features.zslm", features[rows])
    (out / "labels.txt").write_text("".join(f"{v}\n" for v in labels[rows]))
    np.savetxt(out / "attributes.csv", att["att"].T, delimiter=",", fmt="%.9g")
    (out / "split.txt").write_text(
        "seen " + " ".join(map(str, seen)) + "\nunseen " + " ".join(map(str, unseen)) + "\n"
    )
    print(f"{len(rows)} rows ({len(seen_rows)} seen, {len(unseen_rows)} unseen), "
          f"{len(seen)}/{len(unseen)} classes -> {out}")


if __name__ == "__main__":
    main()
