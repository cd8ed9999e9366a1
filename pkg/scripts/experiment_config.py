"""實驗設定：JSON 設定檔 + 命令列旗標（旗標優先），由 marshmallow schema 驗證。"""
import json
import os
from dataclasses import dataclass, field
from typing import List, Optional

from marshmallow import Schema, ValidationError, fields, post_load, validate, validates_schema

COMMANDS = ("simulate", "attack", "availability", "mining", "storage-cost", "coverage")
SEEDED_COMMANDS = ("simulate", "attack", "availability", "mining")
RESULT_DIR = "results"
THREADS_ENV = "ZONED_LEDGER_THREADS"

DEFAULT_FRACTIONS = [2.0 ** -k for k in range(4, 13)]


@dataclass
class ExperimentConfig:
    command: str
    n: int = 24
    m: int = 4
    block_bytes: int = 48
    hash_width: int = 64
    seed: Optional[int] = None
    trials: int = 10_000
    rho: float = 0.1
    target_fraction: float = 2.0 ** -8
    scan_limit: Optional[int] = None
    adaptive: bool = False
    blocks: int = 50
    q_bits: float = 1024
    p_bits: float = 256
    field_bits: int = 61
    eps: float = 0.1
    fractions: List[float] = field(default_factory=lambda: list(DEFAULT_FRACTIONS))
    snapshot: Optional[str] = None
    out: Optional[str] = None

    @property
    def out_path(self) -> str:
        return self.out or os.path.join(RESULT_DIR, f"{self.command}.jsonl")


class ExperimentConfigSchema(Schema):
    command = fields.Str(required=True, validate=validate.OneOf(COMMANDS))
    n = fields.Int(load_default=24, validate=validate.Range(min=1))
    m = fields.Int(load_default=4, validate=validate.Range(min=1))
    block_bytes = fields.Int(load_default=48, validate=validate.Range(min=0))
    hash_width = fields.Int(load_default=64, validate=validate.Range(min=8, max=256))
    seed = fields.Int(load_default=None, allow_none=True, validate=validate.Range(min=0))
    trials = fields.Int(load_default=10_000, validate=validate.Range(min=1))
    rho = fields.Float(load_default=0.1, validate=validate.Range(min=0, max=1, max_inclusive=False))
    target_fraction = fields.Float(load_default=2.0 ** -8,
                                   validate=validate.Range(min=0, max=1, min_inclusive=False))
    scan_limit = fields.Int(load_default=None, allow_none=True, validate=validate.Range(min=0))
    adaptive = fields.Bool(load_default=False)
    blocks = fields.Int(load_default=50, validate=validate.Range(min=1))
    q_bits = fields.Float(load_default=1024, validate=validate.Range(min=0))
    p_bits = fields.Float(load_default=256, validate=validate.Range(min=0))
    field_bits = fields.Int(load_default=61, validate=validate.Range(min=2, max=127))
    eps = fields.Float(load_default=0.1, validate=validate.Range(min=0, max=1, min_inclusive=False,
                                                                 max_inclusive=False))
    fractions = fields.List(fields.Float(validate=validate.Range(min=0, max=1, min_inclusive=False)),
                            load_default=lambda: list(DEFAULT_FRACTIONS))
    snapshot = fields.Str(load_default=None, allow_none=True)
    out = fields.Str(load_default=None, allow_none=True)

    @validates_schema
    def check_invariants(self, data, **kwargs):
        n, m = data["n"], data["m"]
        if data["command"] == "storage-cost":
            # 只用到公式，m 不必是偶數
            return
        if m % 2:
            raise ValidationError(f"m={m} must be even (zones are built from two groups of m/2)", "m")
        if n % m:
            raise ValidationError(f"n={n} must be divisible by m={m}", "n")
        if data["block_bytes"] % m:
            raise ValidationError(f"block_bytes={data['block_bytes']} must be divisible by m={m}",
                                  "block_bytes")
        if data["hash_width"] % 8:
            raise ValidationError("hash_width must be a multiple of 8", "hash_width")
        if data["command"] in SEEDED_COMMANDS and data["seed"] is None:
            raise ValidationError(f"--seed is mandatory for {data['command']}", "seed")

    @post_load
    def make_config(self, data, **kwargs) -> ExperimentConfig:
        return ExperimentConfig(**data)


def load_config(command: str, config_file: Optional[str] = None, **overrides) -> ExperimentConfig:
    """設定檔先載入，再用非 None 的旗標覆蓋。"""
    raw = {}
    if config_file:
        try:
            with open(config_file, "r", encoding="utf-8") as f:
                raw = json.load(f)
        except OSError as e:
            raise ValidationError(f"cannot read config file {config_file}: {e.strerror}", "config") from e
        except json.JSONDecodeError as e:
            raise ValidationError(f"config file {config_file} is not valid JSON: {e.msg} (line {e.lineno})",
                                  "config") from e
        if not isinstance(raw, dict):
            raise ValidationError("config file must hold a JSON object")
    raw.update({k: v for k, v in overrides.items() if v is not None})
    raw["command"] = command
    return ExperimentConfigSchema().load(raw)
