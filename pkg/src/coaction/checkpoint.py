"""Checkpoint persistence.

Layout: 7-byte magic "COACT1\\0", one pad byte, a little-endian u32
length, a JSON block (model config, training metadata, and a tensor
manifest of name/shape/offset), then the tensors as contiguous
little-endian float32 arrays in manifest order. Offsets are relative
to the start of the tensor section. Training stays in float64; the
cast to float32 happens only on disk.
"""

import json
import struct

import numpy as np

from .autodiff import Tensor
from .model import Checkpoint, ModelConfig, TaskSpec

MAGIC = b"COACT1\x00"
PAD = b"\x00"


def _config_to_dict(cfg: ModelConfig) -> dict:
    return {
        "backbone": cfg.backbone, "embed_dim": cfg.embed_dim, "heads": cfg.heads,
        "ff_dim": cfg.ff_dim, "encoder_layers": cfg.encoder_layers,
        "dropout": cfg.dropout, "pool_hidden": cfg.pool_hidden,
        "d_task": cfg.d_task, "seed": cfg.seed, "d_max": cfg.d_max,
        "tasks": [{"id": t.id, "n": t.n, "m": t.m,
                   "lower": t.lower.tolist(), "upper": t.upper.tolist(),
                   "output_mode": t.output_mode} for t in cfg.tasks],
    }


def _config_from_dict(doc: dict) -> ModelConfig:
    tasks = [TaskSpec(id=t["id"], n=t["n"], m=t["m"],
                      lower=np.asarray(t["lower"], dtype=np.float64),
                      upper=np.asarray(t["upper"], dtype=np.float64),
                      output_mode=t["output_mode"]) for t in doc["tasks"]]
    return ModelConfig(tasks=tasks, backbone=doc["backbone"],
                       embed_dim=doc["embed_dim"], heads=doc["heads"],
                       ff_dim=doc["ff_dim"], encoder_layers=doc["encoder_layers"],
                       dropout=doc["dropout"], pool_hidden=doc["pool_hidden"],
                       d_task=doc["d_task"], seed=doc["seed"], d_max=doc["d_max"])


def save_checkpoint(ckpt: Checkpoint, path: str):
    manifest = []
    blobs = []
    offset = 0
    for name in sorted(ckpt.params):
        arr = ckpt.params[name].data.astype("<f4")
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        blobs.append(arr.tobytes())
        offset += arr.nbytes
    meta = {"config": _config_to_dict(ckpt.config),
            "training_meta": ckpt.training_meta, "manifest": manifest}
    meta_bytes = json.dumps(meta, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC + PAD)
        fh.write(struct.pack("<I", len(meta_bytes)))
        fh.write(meta_bytes)
        for blob in blobs:
            fh.write(blob)


def load_checkpoint(path: str) -> Checkpoint:
    with open(path, "rb") as fh:
        head = fh.read(8)
        if head[:7] != MAGIC:
            raise ValueError(f"{path}: not a checkpoint file (bad magic)")
        (meta_len,) = struct.unpack("<I", fh.read(4))
        meta = json.loads(fh.read(meta_len))
        data = fh.read()

    config = _config_from_dict(meta["config"])
    params = {}
    expected = 0
    for entry in meta["manifest"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        if entry["offset"] != expected:
            raise ValueError(f"{path}: manifest offsets not contiguous at "
                             f"'{entry['name']}'")
        raw = np.frombuffer(data, dtype="<f4", count=count, offset=entry["offset"])
        params[entry["name"]] = Tensor(raw.reshape(shape).astype(np.float64),
                                       requires_grad=True)
        expected += count * 4
    if expected != len(data):
        raise ValueError(f"{path}: tensor section length mismatch")
    return Checkpoint(config=config, params=params,
                      training_meta=meta.get("training_meta", {}))
