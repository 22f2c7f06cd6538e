"""Desk-scale end-to-end run: corpus -> encoder -> progressive GAN (32x32) ->
three style finetunes -> zero-shot generation -> recognizer evaluation.

Every stage goes through the ``plategan`` CLI, so each output directory
carries a ``run_config.json`` that can be replayed. Finished stages are
skipped on rerun (a stage counts as finished once its run_config exists),
which lets an interrupted run pick up where it stopped.

    python3 demos/desk_experiment.py [OUT_DIR] [--images-per-phase N]

OUT_DIR defaults to demos/desk_run_30k.

Writes ``OUT_DIR/results.json`` with timings and the three checks:
zero-shot character accuracy of the dominant style, the rank correlation
between training count and per-style state accuracy, and finetuned vs
generic word accuracy for NY, VA and MO.
"""

from __future__ import annotations

import argparse
import copy
import json
import shutil
import time
from pathlib import Path

from plategan import cli
from plategan.dataprep import DEFAULT_COUNTS, CorpusManifest
from plategan.evaluation.reports import count_accuracy_correlation
from plategan.evaluation.metrics import AccuracyReport

FINETUNE_STYLES = ("NY", "VA", "MO")
LABELS_PER_STYLE = 100

CONFIG = {
    "train-encoder": {"epochs": 40},
    "train-gan": {
        "max_resolution": 32, "images_per_phase": 30000, "batch_size": 16,
        "gan": {"fmap_max": 64, "fmap_min": 16, "halve_above": 8, "latent_dim": 128},
    },
    "finetune": {"images": 4000},
}


def _run(out: Path, argv, timings, key):
    """Run one CLI command unless ``out`` already holds its run_config."""
    if (out / "run_config.json").exists():
        return
    if out.exists():
        # leftovers of an interrupted attempt
        shutil.rmtree(out) if out.is_dir() else out.unlink()
    t = time.time()
    code = cli.main(argv)
    if code != cli.EXIT_OK:
        raise SystemExit(f"{argv[0]} failed with exit code {code}")
    timings[key] = round(time.time() - t, 1)


def zero_shot_labels(manifest, per_style=LABELS_PER_STYLE):
    """Test-split labels (never seen in training), capped per style."""
    by_style = {}
    for lb in sorted({e.label for e in manifest.split("test")}):
        by_style.setdefault(lb.style, []).append(lb)
    return {s: lbs[:per_style] for s, lbs in by_style.items()}


def _acc(d):
    return AccuracyReport(**{k: d[k] for k in ("total", "state", "word", "char", "n")})


def run(root, images_per_phase=None):
    root = Path(root)
    config = copy.deepcopy(CONFIG)
    if images_per_phase:
        config["train-gan"]["images_per_phase"] = int(images_per_phase)
    root.mkdir(parents=True, exist_ok=True)
    cfg_path = root / "config.json"
    cfg_path.write_text(json.dumps(config, indent=1))
    timings_path = root / "timings.json"
    timings = json.loads(timings_path.read_text()) if timings_path.exists() else {}

    def step(out, argv, key):
        _run(out, argv, timings, key)
        timings_path.write_text(json.dumps(timings, indent=1))

    corpus, enc, gan = root / "corpus", root / "encoder", root / "gan"
    encoder = enc / "encoder.pt"
    step(corpus, ["make-dataset", "--out", str(corpus), "--seed", "0"], "make-dataset")
    step(enc, ["train-encoder", "--config", str(cfg_path), "--corpus", str(corpus),
               "--out", str(enc), "--seed", "0"], "train-encoder")
    step(gan, ["train-gan", "--config", str(cfg_path), "--corpus", str(corpus),
               "--encoder", str(encoder), "--out", str(gan), "--seed", "0"], "train-gan")
    generic = gan / "stage_32.pt"
    for style in FINETUNE_STYLES:
        step(gan / f"finetune_{style}",
             ["finetune", "--config", str(cfg_path), "--corpus", str(corpus),
              "--encoder", str(encoder), "--gan", str(generic), "--style", style, "--seed", "0"],
             f"finetune-{style}")

    manifest = CorpusManifest.load(corpus)
    labels = zero_shot_labels(manifest)
    all_file = root / "labels_all.txt"
    all_file.write_text("".join(f"{lb.style}_{lb.text}\n" for s in sorted(labels)
                                for lb in labels[s]))
    gen_dirs = {"Generic": root / "gen_generic"}
    step(gen_dirs["Generic"], ["generate", "--checkpoint", str(generic), "--encoder",
                               str(encoder), "--labels-file", str(all_file),
                               "--out", str(gen_dirs["Generic"]), "--seed", "0"],
         "generate-generic")
    for style in FINETUNE_STYLES:
        f = root / f"labels_{style}.txt"
        f.write_text("".join(f"{lb.style}_{lb.text}\n" for lb in labels[style]))
        d = root / f"gen_finetuned_{style}"
        gen_dirs[f"Finetuned_{style}"] = d
        step(d, ["generate", "--checkpoint", str(gan / f"finetune_{style}.pt"), "--encoder",
                 str(encoder), "--labels-file", str(f), "--out", str(d), "--seed", "0"],
             f"generate-{style}")
    ev = root / "eval"
    step(ev, ["evaluate", "--corpus", str(corpus), "--out", str(ev), "--seed", "0",
              *[a for name, d in gen_dirs.items() for a in ("--generated", f"{name}={d}")]],
         "evaluate")

    generic_rep = json.loads((ev / "Generic" / "metrics.json").read_text())
    per_style = {s: _acc(r) for s, r in generic_rep["per_style"].items()}
    train_counts = {}
    for e in manifest.split("train"):
        train_counts[e.label.style] = train_counts.get(e.label.style, 0) + 1
    rho = count_accuracy_correlation(per_style, train_counts, "state")
    dominant = max(DEFAULT_COUNTS, key=DEFAULT_COUNTS.get)
    finetune = {}
    for style in FINETUNE_STYLES:
        ft = json.loads((ev / f"Finetuned_{style}" / "metrics.json").read_text())
        finetune[style] = {"generic_word": per_style[style].word,
                           "finetuned_word": ft["overall"]["word"],
                           "generic_char": per_style[style].char,
                           "finetuned_char": ft["overall"]["char"]}
    results = {
        "config": config,
        "timings_s": timings,
        "total_s": round(sum(timings.values()), 1),
        "dominant_style": dominant,
        "zero_shot_char_dominant": per_style[dominant].char,
        "per_style_generic": {s: r.to_dict() for s, r in per_style.items()},
        "train_counts": train_counts,
        "spearman_count_vs_state": rho,
        "finetune": finetune,
        "finetune_not_worse": sum(v["finetuned_word"] >= v["generic_word"]
                                  for v in finetune.values()),
        "ssim": json.loads((ev / "ssim.json").read_text()),
    }
    (root / "results.json").write_text(json.dumps(results, indent=1))
    return results


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default=str(Path(__file__).parent / "desk_run_30k"))
    ap.add_argument("--images-per-phase", type=int)
    args = ap.parse_args()
    res = run(args.out, args.images_per_phase)
    print(json.dumps({k: res[k] for k in ("total_s", "zero_shot_char_dominant",
                                          "spearman_count_vs_state", "finetune")}, indent=1))
