# 實驗入口：python -m scripts.run_experiment <subcommand> [flags]
import argparse
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional

sys.path.append(os.path.abspath(os.path.join(os.path.dirname(__file__), "..")))

import numpy as np
import pandas as pd
from marshmallow import ValidationError

from adversary_lab.availability import availability_trial, zone_size_bounds
from adversary_lab.consistent_corruption import (consistent_corruption_trial,
                                                 minimal_total_corruption)
from adversary_lab.denial_of_service import dos_erasure_scenario, dos_tolerance
from adversary_lab.exposure_scan import dynamic_exposure_scan, half_network_zones
from adversary_lab.hash_corruption import hash_corruption_trial
from adversary_lab.scenarios import apply_attack
from adversary_lab.trials import AttackSpec, TrialSummary, merge_summaries
from adversary_lab.zone_corruption import zone_corruption_trial
from backend.chain_snapshot import save_snapshot
from backend.errors import ZonedLedgerError
from backend.ledger_core import (ChainConfig, build_chain, storage_breakdown, storage_cost_formula,
                                 storage_cost_general)
from backend.recovery import recover_block
from backend.tree_cipher import key_entropy_bits
from backend.zone_scheduler import coverage_audit
from mining_bench.comparison import mining_sweep, scheme_cost_comparison
from scripts.experiment_config import COMMANDS, THREADS_ENV, ExperimentConfig, load_config

logger = logging.getLogger(__name__)

# batch 數固定，輸出才不會隨執行緒數改變
TRIAL_BATCHES = 8


def status(message: str):
    print(message, file=sys.stderr)


def worker_count() -> int:
    value = int(os.environ.get(THREADS_ENV, "0") or 0)
    return value if value > 0 else (os.cpu_count() or 1)


def seed_stream(seed: int, *labels: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, *labels])


def run_batches(run: Callable[[int, np.random.Generator], TrialSummary], trials: int,
                seed: int, *labels: int) -> TrialSummary:
    """把 trials 切成固定數量的 batch，各自用 spawn 出來的 rng 平行跑再相加。"""
    batches = max(1, min(TRIAL_BATCHES, trials))
    sizes = [trials // batches + (1 if i < trials % batches else 0) for i in range(batches)]
    children = seed_stream(seed, *labels).spawn(batches)
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        futures = [pool.submit(run, size, np.random.default_rng(child))
                   for size, child in zip(sizes, children)]
        parts = [f.result() for f in futures]
    merged = merge_summaries(parts)
    merged.seed = seed
    return merged


def chain_config(config: ExperimentConfig, seed: Optional[int] = None) -> ChainConfig:
    return ChainConfig(n=config.n, m=config.m, block_bytes=config.block_bytes,
                       hash_width=config.hash_width, seed=config.seed if seed is None else seed)


# === simulate：提交 T 個區塊，逐一做誠實讀取驗證 ===
def cmd_simulate(config: ExperimentConfig) -> List[dict]:
    state = build_chain(chain_config(config), config.blocks,
                        np.random.default_rng(seed_stream(config.seed, 0)))
    status(f"✅ committed {state.head} blocks across {state.zone_count()} zones")

    records = []
    for t in range(1, state.head + 1):
        report = recover_block(state, t, config.scan_limit)
        records.append({
            "slot": t,
            "ok": report.recovered == state.ground_truth(t),
            "unanimous": report.unanimous,
            "slots_scanned": report.slots_scanned,
            "storage_bits_peer0": sum(storage_breakdown(state, 0, t).values()),
        })
    if config.snapshot:
        save_snapshot(state, config.snapshot)
        status(f"💾 snapshot saved to {config.snapshot}")
    failed = [r["slot"] for r in records if not r["ok"]]
    if failed:
        status(f"❌ honest recovery failed at slots {failed}")
    return records


# === attack：各種攻擊實驗與腳本 ===
def cmd_attack(config: ExperimentConfig) -> List[dict]:
    n, m, seed = config.n, config.m, config.seed
    records = []

    summary = run_batches(lambda size, rng: hash_corruption_trial(m, config.field_bits, size, rng),
                          config.trials, seed, 1)
    records.append(summary.to_record())

    for c in range(1, m + 1):
        summary = run_batches(lambda size, rng, c=c: zone_corruption_trial(m, c, size, rng),
                              config.trials, seed, 2, c)
        records.append(summary.to_record())

    if n % (2 * m) == 0:
        zones = n // (2 * m)
        per_zone = [max(1, m // 2)] * zones
        summary = run_batches(
            lambda size, rng: consistent_corruption_trial(n, m, per_zone, size, rng),
            config.trials, seed, 3)
        records.append(summary.to_record())
        minimal = minimal_total_corruption(n, m, config.eps, max(1, config.trials // 10),
                                             np.random.default_rng(seed_stream(seed, 4)))
        minimal.pop("sweep")
        records.append({"experiment": "minimal_total_corruption", **minimal})
    else:
        status(f"⚠️ n/(2m) is not an integer for n={n}, m={m}; skipping joint corruption")

    exposure = dynamic_exposure_scan(n, m, half_network_zones(n, m), 2 * n // m)
    records.append({"experiment": "dynamic_exposure", **exposure})

    # 腳本：slot 1 有 ceil(n/2m) 個 zone 被完全控制並改寫
    rng = np.random.default_rng(seed_stream(seed, 5))
    state = build_chain(chain_config(config), max(config.blocks, 2), rng)
    truth = state.ground_truth(1)
    replacement = bytes(b ^ 0xFF for b in truth)
    full_zones = math.ceil(n / (2 * m))
    spec = AttackSpec(target_slot=1, replacement=replacement,
                      per_zone_corruption=tuple(m if z < full_zones else 0 for z in range(n // m)),
                      adaptive=config.adaptive)
    attacked = apply_attack(state, spec, rng)
    report = recover_block(state, 1, config.scan_limit)
    records.append({
        "experiment": "scripted_zone_rewrite",
        "corrupted_peers": len(attacked),
        "adaptive": spec.adaptive,
        "eliminated_peers": len(report.eliminated_peers),
        "slots_scanned": report.slots_scanned,
        "recovered_truth": report.recovered == truth,
    })

    dos_state = build_chain(chain_config(config), 1, np.random.default_rng(seed_stream(seed, 6)))
    dos = dos_erasure_scenario(dos_state, 1, np.random.default_rng(seed_stream(seed, 7)))
    records.append({"experiment": "denial_of_service", "dos_tolerance": dos_tolerance(n, m), **dos})
    return records


# === availability：peer 隨機離線時的可讀機率 ===
def cmd_availability(config: ExperimentConfig) -> List[dict]:
    n, m, rho = config.n, config.m, config.rho
    summary = run_batches(lambda size, rng: availability_trial(n, m, rho, size, rng),
                          config.trials, config.seed, 8)
    record = summary.to_record()
    if rho > 0:
        record.update(zone_size_bounds(n, rho, config.eps))
    return [record]


# === mining：各門檻比例的挖礦成本 vs. 抽球模型 ===
def cmd_mining(config: ExperimentConfig) -> List[dict]:
    fractions = sorted(set(config.fractions) | {config.target_fraction}, reverse=True)
    children = seed_stream(config.seed, 9).spawn(len(fractions))
    with ThreadPoolExecutor(max_workers=worker_count()) as pool:
        futures = [pool.submit(mining_sweep, [f], config.trials, np.random.default_rng(child),
                               config.hash_width)
                   for f, child in zip(fractions, children)]
        records = [dict(f.result()[0], experiment="mining") for f in futures]

    comparison = scheme_cost_comparison(config.n, config.m, config.hash_width, config.target_fraction,
                                        np.random.default_rng(seed_stream(config.seed, 10)),
                                        block_bytes=config.block_bytes)
    records.append({"experiment": "scheme_cost_comparison", **comparison})
    return records


# === storage-cost：公式與實際量測 ===
def cmd_storage_cost(config: ExperimentConfig) -> List[dict]:
    baseline, distributed, gain = storage_cost_formula(config.q_bits, config.p_bits, config.m)
    records = [{
        "source": "formula",
        "m": config.m,
        "q_bits": config.q_bits,
        "p_bits": config.p_bits,
        "baseline": baseline,
        "distributed": distributed,
        "gain": gain,
    }]
    general = storage_cost_general(config.q_bits, key_entropy_bits(config.m), config.p_bits, config.m)
    records.append({"source": "general", "m": config.m, "q_bits": config.q_bits,
                    "p_bits": config.p_bits, **general})

    if config.m % 2 == 0 and config.n % config.m == 0 and config.block_bytes % config.m == 0:
        seed = config.seed if config.seed is not None else 0
        state = build_chain(chain_config(config, seed), 1, np.random.default_rng(seed_stream(seed, 11)))
        parts = storage_breakdown(state, 0, 1)
        records.append({"source": "measured", "m": config.m, "q_bits": 8 * config.block_bytes,
                        "p_bits": config.hash_width, "distributed": sum(parts.values()), **parts})
    return records


# === coverage：zone 排程的完整稽核 ===
def cmd_coverage(config: ExperimentConfig) -> List[dict]:
    audit = coverage_audit(config.n, config.m)
    if not audit["all_pairs_covered"]:
        status("❌ some peer pairs never share a zone")
    return [audit]


HANDLERS = {
    "simulate": cmd_simulate,
    "attack": cmd_attack,
    "availability": cmd_availability,
    "mining": cmd_mining,
    "storage-cost": cmd_storage_cost,
    "coverage": cmd_coverage,
}


def write_records(records: List[dict], path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")


def summary_table(records: List[dict]) -> str:
    flat = [{k: v for k, v in r.items() if not isinstance(v, (list, dict))} for r in records]
    return pd.DataFrame(flat).to_string(index=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="run_experiment",
                                     description="Zoned distributed ledger storage experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--n", type=int)
        p.add_argument("--m", type=int)
        p.add_argument("--block-bytes", dest="block_bytes", type=int)
        p.add_argument("--hash-width", dest="hash_width", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--rho", type=float)
        p.add_argument("--target-fraction", dest="target_fraction", type=float)
        p.add_argument("--scan-limit", dest="scan_limit", type=int)
        p.add_argument("--adaptive", action="store_true", default=None,
                       help="attacker keeps rewriting later slots as zones remix")
        p.add_argument("--blocks", type=int)
        p.add_argument("--q-bits", dest="q_bits", type=float)
        p.add_argument("--p-bits", dest="p_bits", type=float)
        p.add_argument("--field-bits", dest="field_bits", type=int)
        p.add_argument("--eps", type=float)
        p.add_argument("--fractions", type=float, nargs="+")
        p.add_argument("--snapshot")
        p.add_argument("--out")
        p.add_argument("--log-level", dest="log_level", default="WARNING")
    return parser


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    config_file = args.pop("config")
    logging.basicConfig(level=getattr(logging, args.pop("log_level").upper(), logging.WARNING),
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")

    try:
        config = load_config(command, config_file, **args)
        records = HANDLERS[command](config)
    except ValidationError as e:
        status(f"❌ invalid configuration: {e.messages}")
        return 2
    except ZonedLedgerError as e:
        status(f"❌ {type(e).__name__}: {e}")
        return 2

    write_records(records, config.out_path)
    print(summary_table(records))
    status(f"💾 {len(records)} records written to {config.out_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
