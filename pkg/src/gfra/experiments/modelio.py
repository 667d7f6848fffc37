"""Versioned binary model files.

Layout: ASCII header lines ``key=value`` starting with the magic line and
ending with ``end``, followed by little-endian float64 data: for every layer
the row-major weight matrix and then the bias vector.
"""

from __future__ import annotations

import numpy as np

from ..multiplicity.mlp import InputNormalizer, MlpModel

MAGIC = "GFRA-MLP"
VERSION = 1


class ModelFormatError(ValueError):
    pass


def _floats(a) -> str:
    return ",".join(repr(float(v)) for v in np.ravel(a))


def save_model(model: MlpModel, path) -> None:
    norm = model.normalizer
    header = [
        f"{MAGIC} {VERSION}",
        f"M={model.n_inputs}",
        f"S={model.antennas_per_ap}",
        f"t_max={model.t_max}",
        "layer_sizes=" + ",".join(str(n) for n in model.layer_sizes),
        f"normalizer={norm.kind if norm else 'none'}",
    ]
    if norm is not None:
        header += ["normalizer_shift=" + _floats(norm.shift), "normalizer_scale=" + _floats(norm.scale)]
    header += [f"meta.{k}={v}" for k, v in sorted(model.meta.items())]
    header.append("end")
    blob = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes()
                    for w, b in zip(model.weights, model.biases) for a in (w, b))
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        fh.write(blob)


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        raw = fh.read()
    offset = 0
    fields = {}
    first = True
    while True:
        nl = raw.find(b"\n", offset)
        if nl < 0:
            raise ModelFormatError(f"{path}: header not terminated (offset {offset})")
        try:
            line = raw[offset:nl].decode("ascii")
        except UnicodeDecodeError:
            raise ModelFormatError(f"{path}: non-ASCII header at offset {offset}") from None
        if first:
            parts = line.split()
            if len(parts) != 2 or parts[0] != MAGIC:
                raise ModelFormatError(f"{path}: bad magic at offset {offset}")
            if parts[1] != str(VERSION):
                raise ModelFormatError(f"{path}: unsupported version {parts[1]!r} at offset {offset}")
            first = False
        elif line == "end":
            offset = nl + 1
            break
        else:
            if "=" not in line:
                raise ModelFormatError(f"{path}: malformed header line at offset {offset}")
            k, v = line.split("=", 1)
            fields[k] = v
        offset = nl + 1
    try:
        sizes = tuple(int(n) for n in fields["layer_sizes"].split(","))
        m, s, t_max = int(fields["M"]), int(fields["S"]), int(fields["t_max"])
        kind = fields["normalizer"]
    except (KeyError, ValueError) as exc:
        raise ModelFormatError(f"{path}: missing or invalid header field ({exc})") from None
    if sizes[0] != m or sizes[-1] != t_max + 1:
        raise ModelFormatError(f"{path}: layer sizes {sizes} disagree with M={m}, t_max={t_max}")
    norm = None
    if kind != "none":
        shift = np.array([float(v) for v in fields["normalizer_shift"].split(",")])
        scale = np.array([float(v) for v in fields["normalizer_scale"].split(",")])
        norm = InputNormalizer(kind, shift, scale)
    ws, bs = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        for shape in ((n_out, n_in), (n_out,)):
            nbytes = 8 * int(np.prod(shape))
            if offset + nbytes > len(raw):
                raise ModelFormatError(f"{path}: truncated parameter data at offset {offset}")
            arr = np.frombuffer(raw, dtype="<f8", count=nbytes // 8, offset=offset).reshape(shape)
            (ws if len(shape) == 2 else bs).append(arr.astype(float))
            offset += nbytes
    if offset != len(raw):
        raise ModelFormatError(f"{path}: {len(raw) - offset} trailing bytes at offset {offset}")
    meta = {k[5:]: v for k, v in fields.items() if k.startswith("meta.")}
    return MlpModel(sizes, ws, bs, norm, s, meta)


def check_model_matches(model: MlpModel, n_aps: int, antennas_per_ap: int, t_max: int | None = None) -> None:
    if model.n_inputs != n_aps or model.antennas_per_ap != antennas_per_ap:
        raise ValueError(f"model built for M={model.n_inputs}, S={model.antennas_per_ap}; "
                         f"configuration has M={n_aps}, S={antennas_per_ap}")
    if t_max is not None and model.t_max != t_max:
        raise ValueError(f"model has t_max={model.t_max}, configuration has {t_max}")
