"""Field serialization: text tables with a key=value header, run-length
encoded mask, and in-mask node values in lexicographic (C) order."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .config import domain_from_config, domain_to_config
from .errors import ConfigError, MVLabError
from .grid import Domain, ScalarField

FORMAT_TAG = "mvlab-field v1"


def mask_rle(mask: np.ndarray) -> str:
    flat = mask.ravel()
    change = np.flatnonzero(np.diff(flat)) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change, [flat.size]])
    return ",".join(f"{int(flat[s])}x{e - s}" for s, e in zip(starts, ends))


def mask_from_rle(text: str, shape: tuple[int, ...]) -> np.ndarray:
    out = np.empty(int(np.prod(shape)), dtype=np.int8)
    pos = 0
    for token in text.split(","):
        code, count = token.split("x")
        count = int(count)
        out[pos:pos + count] = np.int8(code)
        pos += count
    if pos != out.size:
        raise MVLabError("mask run-length data does not fill the grid box")
    return out.reshape(shape)


def write_field(e: ScalarField, path: str | Path) -> None:
    dom = e.domain
    lines = [f"# {FORMAT_TAG}"]
    lines.append(f"domain={json.dumps(domain_to_config(dom), sort_keys=True)}")
    lines.append(f"origin={','.join(repr(float(x)) for x in dom.origin)}")
    lines.append(f"shape={','.join(str(s) for s in dom.shape)}")
    lines.append(f"density={'true' if e.density else 'false'}")
    lines.append(f"mask_rle={mask_rle(dom.mask)}")
    lines.append("values:")
    vals = e.values.ravel()[dom.in_mask.ravel()]
    lines.extend(repr(float(v)) for v in vals)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_field(path: str | Path, domain: Domain | None = None) -> ScalarField:
    """Read a field file. Passing an existing ``domain`` skips rebuilding the
    grid (useful for sequences sharing one domain) but still verifies the
    stored header against it."""
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or not text[0].startswith(f"# {FORMAT_TAG}"):
        raise ConfigError(f"{path}: not a {FORMAT_TAG} file")
    header: dict[str, str] = {}
    value_start = None
    for i, line in enumerate(text[1:], start=1):
        if line == "values:":
            value_start = i + 1
            break
        if "=" not in line:
            raise ConfigError(f"{path}: malformed header line {i + 1}: {line!r}")
        key, _, val = line.partition("=")
        header[key] = val
    if value_start is None:
        raise ConfigError(f"{path}: missing values section")

    dom_cfg = json.loads(header["domain"])
    if domain is None:
        domain = domain_from_config(dom_cfg)
    stored_shape = tuple(int(s) for s in header["shape"].split(","))
    if stored_shape != domain.shape:
        raise ConfigError(f"{path}: stored shape {stored_shape} != rebuilt "
                          f"shape {domain.shape}")
    stored_origin = np.array([float(x) for x in header["origin"].split(",")])
    if not np.allclose(stored_origin, domain.origin, atol=1e-12):
        raise ConfigError(f"{path}: stored origin differs from the rebuilt grid")
    stored_mask = mask_from_rle(header["mask_rle"], domain.shape)
    if not np.array_equal(stored_mask, domain.mask):
        raise ConfigError(f"{path}: stored mask differs from the rebuilt grid")

    vals_flat = np.array([float(v) for v in text[value_start:] if v])
    in_mask = domain.in_mask.ravel()
    if vals_flat.size != int(np.count_nonzero(in_mask)):
        raise ConfigError(f"{path}: {vals_flat.size} values for "
                          f"{int(np.count_nonzero(in_mask))} in-mask nodes")
    values = np.full(in_mask.size, np.nan)
    values[in_mask] = vals_flat
    density = header.get("density", "true") == "true"
    return ScalarField(domain, values.reshape(domain.shape), density)
