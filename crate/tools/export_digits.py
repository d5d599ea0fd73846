#!/usr/bin/env python3
"""Export the scikit-learn 8x8 digits corpus to the binary feature/label formats.

Feature file: magic "ACILFEAT", u32 version=1, u64 n_rows, u32 n_cols,
u8 dtype (1=f32, 2=f64), then row-major values, little-endian.
Label file: magic "ACILLABL", u32 version=1, u64 n_rows, then u32 ids.
"""

import struct
import sys
from pathlib import Path

import numpy as np
from sklearn.datasets import load_digits


def write_features(path: Path, x: np.ndarray) -> None:
    x32 = x.astype(np.float32)
    # pixel intensities are small integers; f32 holds them exactly
    assert np.array_equal(x32.astype(np.float64), x.astype(np.float64))
    with open(path, "wb") as f:
        f.write(b"ACILFEAT")
        f.write(struct.pack("<IQIB", 1, x32.shape[0], x32.shape[1], 1))
        f.write(x32.astype("<f4").tobytes(order="C"))


def write_labels(path: Path, y: np.ndarray) -> None:
    with open(path, "wb") as f:
        f.write(b"ACILLABL")
        f.write(struct.pack("<IQ", 1, y.shape[0]))
        f.write(y.astype("<u4").tobytes(order="C"))


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("data/digits")
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = load_digits()
    x, y = digits.data, digits.target
    print(f"samples={x.shape[0]} features={x.shape[1]} classes={len(set(y))}")
    write_features(out_dir / "features.bin", x)
    write_labels(out_dir / "labels.bin", y)
    print(f"wrote {out_dir / 'features.bin'} and {out_dir / 'labels.bin'}")


if __name__ == "__main__":
    main()
