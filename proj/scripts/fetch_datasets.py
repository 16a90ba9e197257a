#!/usr/bin/env python3
"""Fetch the benchmark datasets used by the dataset acceptance suite.

Produces, under the data root (default ./data or $HDC_DATA_DIR):

    isolet/isolet1+2+3+4.data      training fold, 6238 x 617 + label
    isolet/isolet5.data            test fold
    ucihar/train.txt               561 features + activity label per line
    ucihar/test.txt
    fashion-mnist/{train,t10k}-{images-idx3,labels-idx1}-ubyte
    mnist/... (optional)           same four IDX files
    cifar-10/*.bin (optional)      data_batch_1..5.bin + test_batch.bin

Already-present files are kept, so re-runs only fill gaps.
"""

import argparse
import gzip
import io
import os
import sys
import tarfile
import zipfile
from pathlib import Path
from urllib.request import Request, urlopen

ISOLET_URL = "https://archive.ics.uci.edu/static/public/54/isolet.zip"
UCIHAR_URL = (
    "https://archive.ics.uci.edu/static/public/240/"
    "human+activity+recognition+using+smartphones.zip"
)
FASHION_URL = "https://raw.githubusercontent.com/zalandoresearch/fashion-mnist/master/data/fashion/"
MNIST_URL = "https://ossci-datasets.s3.amazonaws.com/mnist/"
CIFAR_URL = "https://www.cs.toronto.edu/~kriz/cifar-10-binary.tar.gz"

IDX_FILES = [
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
]


def download(url: str) -> bytes:
    print(f"  downloading {url}")
    request = Request(url, headers={"User-Agent": "dataset-fetch/1.0"})
    with urlopen(request, timeout=120) as response:
        return response.read()


def unlzw(data: bytes) -> bytes:
    """Decompress a compress(1) .Z stream (LZW); the stdlib has no codec for it.

    Port of Mark Adler's unlzw: 9..16-bit codes, block mode with clear code
    256, and the byte-alignment flush the original writer performs whenever
    the code width changes.
    """
    if len(data) < 3 or data[0] != 0x1F or data[1] != 0x9D:
        raise ValueError("not a compress(1) .Z stream")
    flags = data[2]
    max_bits = flags & 0x1F
    block_mode = bool(flags & 0x80)
    if not 9 <= max_bits <= 16:
        raise ValueError(f"invalid max code width {max_bits}")
    if len(data) == 3:
        return b""
    if len(data) == 4:
        raise ValueError("truncated .Z stream")

    bits = 9
    mask = 0x1FF
    end = 256 if block_mode else 255  # last used table code

    prefix = [0] * (1 << max_bits)
    suffix = bytearray(1 << max_bits)
    for i in range(256):
        suffix[i] = i

    # First code is always a 9-bit literal.
    nxt = 3
    buf = data[nxt] | (data[nxt + 1] << 8)
    nxt += 2
    prev = final = buf & mask
    if prev > 255:
        raise ValueError("invalid first LZW code")
    buf >>= bits
    left = 16 - bits
    out = bytearray([final])
    mark = 3  # where the current code-width region began

    while nxt < len(data) or left >= bits:
        # The writer bumps the code width one step before the table fills.
        if end >= mask and bits < max_bits:
            rem = (nxt - mark) % bits
            if rem:
                rem = bits - rem
                if rem > len(data) - nxt:
                    break
                nxt += rem
            buf = 0
            left = 0
            mark = nxt
            bits += 1
            mask = (mask << 1) | 1

        while left < bits:
            if nxt == len(data):
                return bytes(out)
            buf |= data[nxt] << left
            nxt += 1
            left += 8
        code = buf & mask
        buf >>= bits
        left -= bits

        if block_mode and code == 256:
            rem = (nxt - mark) % bits
            if rem:
                rem = bits - rem
                if rem > len(data) - nxt:
                    break
                nxt += rem
            buf = 0
            left = 0
            mark = nxt
            bits = 9
            mask = 0x1FF
            end = 255
            # Next code restarts the chain with a literal.
            while left < bits:
                if nxt == len(data):
                    return bytes(out)
                buf |= data[nxt] << left
                nxt += 1
                left += 8
            prev = final = buf & mask
            if prev > 255:
                raise ValueError("invalid LZW code after clear")
            buf >>= bits
            left -= bits
            out.append(final)
            continue

        # Expand one code onto a stack.
        temp = code
        stack = bytearray()
        if code > end:
            if code != end + 1 or prev > end:
                raise ValueError("invalid LZW code")
            stack.append(final)
            code = prev
        while code >= 256:
            stack.append(suffix[code])
            code = prefix[code]
        stack.append(code)
        final = code
        if end < mask:
            end += 1
            prefix[end] = prev
            suffix[end] = final
        prev = temp
        out.extend(reversed(stack))

    return bytes(out)


def find_member(archive: zipfile.ZipFile, basename: str):
    for name in archive.namelist():
        if name.endswith(basename):
            return name
    return None


def fetch_isolet(root: Path) -> None:
    target = root / "isolet"
    names = ["isolet1+2+3+4.data", "isolet5.data"]
    if all((target / n).exists() for n in names):
        print("  isolet already present")
        return
    target.mkdir(parents=True, exist_ok=True)
    archive = zipfile.ZipFile(io.BytesIO(download(ISOLET_URL)))
    for name in names:
        out_path = target / name
        if out_path.exists():
            continue
        member = find_member(archive, name + ".Z")
        if member is None:
            raise FileNotFoundError(f"{name}.Z not found in the isolet archive")
        out_path.write_bytes(unlzw(archive.read(member)))
        print(f"  wrote {out_path}")


def merge_features_labels(x_text: bytes, y_text: bytes) -> str:
    x_lines = x_text.decode().splitlines()
    y_lines = y_text.decode().split()
    if len(x_lines) != len(y_lines):
        raise ValueError(f"feature/label row mismatch: {len(x_lines)} vs {len(y_lines)}")
    return "".join(f"{x} {y}\n" for x, y in zip(x_lines, y_lines))


def fetch_ucihar(root: Path) -> None:
    target = root / "ucihar"
    if (target / "train.txt").exists() and (target / "test.txt").exists():
        print("  ucihar already present")
        return
    target.mkdir(parents=True, exist_ok=True)
    archive = zipfile.ZipFile(io.BytesIO(download(UCIHAR_URL)))
    # The UCI bundle nests the real dataset zip one level down.
    inner_name = find_member(archive, "UCI HAR Dataset.zip")
    if inner_name is not None:
        archive = zipfile.ZipFile(io.BytesIO(archive.read(inner_name)))
    for split in ["train", "test"]:
        x_member = find_member(archive, f"X_{split}.txt")
        y_member = find_member(archive, f"y_{split}.txt")
        if x_member is None or y_member is None:
            raise FileNotFoundError(f"X_{split}.txt / y_{split}.txt not found in the archive")
        out_path = target / f"{split}.txt"
        out_path.write_text(merge_features_labels(archive.read(x_member), archive.read(y_member)))
        print(f"  wrote {out_path}")


def fetch_idx_set(root: Path, subdir: str, base_url: str) -> None:
    target = root / subdir
    if all((target / n).exists() for n in IDX_FILES):
        print(f"  {subdir} already present")
        return
    target.mkdir(parents=True, exist_ok=True)
    for name in IDX_FILES:
        out_path = target / name
        if out_path.exists():
            continue
        out_path.write_bytes(gzip.decompress(download(base_url + name + ".gz")))
        print(f"  wrote {out_path}")


def fetch_cifar10(root: Path) -> None:
    target = root / "cifar-10"
    names = [f"data_batch_{i}.bin" for i in range(1, 6)] + ["test_batch.bin"]
    if all((target / n).exists() for n in names):
        print("  cifar-10 already present")
        return
    target.mkdir(parents=True, exist_ok=True)
    with tarfile.open(fileobj=io.BytesIO(download(CIFAR_URL)), mode="r:gz") as tar:
        for member in tar.getmembers():
            base = os.path.basename(member.name)
            if base in names:
                payload = tar.extractfile(member).read()
                (target / base).write_bytes(payload)
                print(f"  wrote {target / base}")


FETCHERS = {
    "isolet": fetch_isolet,
    "ucihar": fetch_ucihar,
    "fashion-mnist": lambda root: fetch_idx_set(root, "fashion-mnist", FASHION_URL),
    "mnist": lambda root: fetch_idx_set(root, "mnist", MNIST_URL),
    "cifar-10": fetch_cifar10,
}
DEFAULT_SETS = ["isolet", "ucihar", "fashion-mnist"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("datasets", nargs="*",
                        help=f"which of {', '.join(FETCHERS)} to fetch "
                             f"(default: {' '.join(DEFAULT_SETS)})")
    parser.add_argument("--root", default=os.environ.get("HDC_DATA_DIR", "data"),
                        help="data root directory (default: $HDC_DATA_DIR or ./data)")
    args = parser.parse_args()

    requested = args.datasets or DEFAULT_SETS
    unknown = [name for name in requested if name not in FETCHERS]
    if unknown:
        parser.error(f"unknown dataset(s): {', '.join(unknown)}")

    root = Path(args.root)
    failures = []
    for name in requested:
        print(f"fetching {name}")
        try:
            FETCHERS[name](root)
        except Exception as error:  # noqa: BLE001 - report and continue
            print(f"  failed: {error}", file=sys.stderr)
            failures.append(name)
    if failures:
        print(f"failed: {', '.join(failures)}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
