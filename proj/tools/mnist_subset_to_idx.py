#!/usr/bin/env python3
"""Write the 5000-image MNIST subset shipped inside the mlxtend wheel as an IDX3 file.

Usage: mnist_subset_to_idx.py OUT_PATH [--wheel PATH]

Without --wheel the script downloads mlxtend with pip into a temporary
directory. Labels are dropped; only the 28x28 images are written.
"""
import argparse
import gzip
import io
import pathlib
import struct
import subprocess
import sys
import tempfile
import zipfile

CSV_MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def fetch_wheel(workdir: pathlib.Path) -> pathlib.Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", "mlxtend", "-d", str(workdir)],
        check=True,
    )
    return next(workdir.glob("mlxtend-*.whl"))


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("out")
    parser.add_argument("--wheel")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = pathlib.Path(args.wheel) if args.wheel else fetch_wheel(pathlib.Path(tmp))
        raw = gzip.decompress(zipfile.ZipFile(wheel).read(CSV_MEMBER)).decode()

    rows = [line.split(",") for line in raw.splitlines() if line.strip()]
    buf = io.BytesIO()
    buf.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
    for row in rows:
        pixels = [int(float(v)) for v in row[:784]]
        buf.write(bytes(pixels))
    pathlib.Path(args.out).write_bytes(buf.getvalue())
    print(f"wrote {len(rows)} images to {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
