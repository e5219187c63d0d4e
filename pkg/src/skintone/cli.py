"""Command-line entry point for the toolkit workflows.

Subcommands: extract | split | balance | train | tune | cv | eval | agree |
audit | serve. Every run that writes an artifact also writes a
<artifact>.run.json reproducibility record (argv, config hash, seed,
versions - no timestamps, so records are bit-reproducible).

Exit codes: 0 success, 1 operation error, 2 usage error.
"""

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__, audit as audit_mod, classifiers, metrics, splits
from .config import config_hash, load_config
from .data import load_image, load_manifest, merge_label_files, save_manifest
from .descriptors import (FeatureConfig, descriptor_layout, feature_vector,
                          load_features, save_features)
from .segmentation import RegionKind, resolve_mask


def _write_run_record(artifact_path, argv, cfg, seed):
    record = {
        "argv": list(argv),
        "config_hash": config_hash(cfg),
        "seed": seed,
        "versions": {"python": platform.python_version(),
                     "numpy": np.__version__,
                     "skintone": __version__},
    }
    path = Path(str(artifact_path) + ".run.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(record, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _feature_config(cfg, args):
    fc = cfg.desc
    if getattr(args, "bins", None) is not None:
        fc = FeatureConfig(bins=args.bins, tau=fc.tau,
                           tau_percent=fc.tau_percent, normalize=fc.normalize)
    return fc


def _image_loader(cfg):
    root = cfg.data_root

    def loader(path):
        p = Path(path)
        if root is not None and not p.is_absolute():
            p = Path(root) / p
        return load_image(p)

    return loader


def _labeled_rows(ids, labels, X, keep_ids=None):
    keep = []
    for i, (img_id, label) in enumerate(zip(ids, labels)):
        if label is None:
            continue
        if keep_ids is not None and img_id not in keep_ids:
            continue
        keep.append(i)
    rows = np.array(keep, dtype=int)
    return [ids[i] for i in keep], np.array([labels[i] for i in keep]), X[rows]


# ---------------------------------------------------------------------------
# Subcommand implementations

def _cmd_extract(args, argv):
    cfg = load_config(args.config)
    fc = _feature_config(cfg, args)
    manifest = load_manifest(args.manifest)
    region = RegionKind.parse(args.region)
    loader = _image_loader(cfg)

    ids, labels, rows = [], [], []
    skipped = []
    for image_id in sorted(manifest.images):
        record = manifest.images[image_id]
        try:
            image = loader(record.path)
            mask = resolve_mask(image, image_id, region, args.mask_dir, cfg.seg)
            vec = feature_vector(image, mask, region, fc)
        except Exception as exc:
            skipped.append((image_id, str(exc)))
            continue
        ids.append(image_id)
        label = manifest.individuals[record.individual_id].label
        labels.append(label)
        rows.append(vec.values)
    if not rows:
        raise RuntimeError(f"no image could be processed "
                           f"({len(skipped)} skipped)")
    save_features(args.out, ids, labels, np.array(rows))
    layout = descriptor_layout(fc)
    with open(str(args.out) + ".layout.json", "w", encoding="utf-8") as fh:
        json.dump({"hash": layout.hash(), "bins": layout.bins,
                   "normalize": layout.normalize, "length": layout.length,
                   "blocks": [list(b) for b in layout.blocks]},
                  fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_run_record(args.out, argv, cfg, seed=None)
    if skipped:
        print(f"extract: skipped {len(skipped)} image(s)", file=sys.stderr)
        for image_id, reason in skipped:
            print(f"  {image_id}: {reason}", file=sys.stderr)
    print(f"extract: wrote {len(ids)} feature rows to {args.out}")
    return 0


def _cmd_split(args, argv):
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    if args.kfold is not None:
        plan = splits.kfold_by_individual(manifest, args.kfold, args.seed)
    elif args.custom_test is not None:
        plan, remainder = splits.build_custom_test(manifest, args.custom_test,
                                                   args.seed)
        if args.remainder_out:
            save_manifest(remainder, args.remainder_out)
    else:
        fractions = [float(f) for f in args.fractions.split(",")]
        if args.mode == "ind":
            plan = splits.split_by_individuals(manifest, fractions, args.seed)
        else:
            plan = splits.split_by_images(manifest, fractions, args.seed)
    splits.save_plan(plan, args.out)
    _write_run_record(args.out, argv, cfg, seed=args.seed)
    sizes = {k: len(v) for k, v in plan.partitions.items()}
    print(f"split: wrote plan {args.out} with partitions {sizes}")
    return 0


def _cmd_balance(args, argv):
    cfg = load_config(args.config)
    manifest = load_manifest(args.manifest)
    plan = splits.balance(manifest, args.max_per_individual, args.seed)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(plan.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_run_record(args.out, argv, cfg, seed=args.seed)
    print(f"balance: kept {len(plan.selected)} images; per-class counts "
          f"{plan.per_class_counts}")
    return 0


def _load_spec(path):
    with open(path, encoding="utf-8") as fh:
        return classifiers.ModelSpec.from_dict(json.load(fh))


def _layout_hash_for_features(features_path):
    sidecar = Path(str(features_path) + ".layout.json")
    if sidecar.exists():
        with open(sidecar, encoding="utf-8") as fh:
            return json.load(fh)["hash"]
    return None


def _partition_ids(plan_path, part):
    plan = splits.load_plan(plan_path)
    if part not in plan.partitions:
        raise RuntimeError(f"plan has no partition {part!r} "
                           f"(has {sorted(plan.partitions)})")
    return set(plan.partitions[part])


def _cmd_train(args, argv):
    cfg = load_config(args.config)
    spec = _load_spec(args.spec)
    ids, labels, X = load_features(args.features)
    train_keep = _partition_ids(args.plan, args.train_part) if args.plan else None
    _, y_tr, X_tr = _labeled_rows(ids, labels, X, train_keep)
    val = None
    if args.plan and args.val_part:
        val_keep = _partition_ids(args.plan, args.val_part)
        _, y_val, X_val = _labeled_rows(ids, labels, X, val_keep)
        if len(y_val):
            val = (X_val, y_val)
    layout_hash = _layout_hash_for_features(args.features)
    model = classifiers.train(spec, X_tr, y_tr, val=val, layout=layout_hash,
                              dataset=Path(args.features).stem)
    classifiers.save_model(model, args.out)
    _write_run_record(args.out, argv, cfg, seed=spec.seed)
    print(f"train: fitted {spec.family} on {len(y_tr)} samples -> {args.out}")
    return 0


def _cmd_tune(args, argv):
    cfg = load_config(args.config)
    with open(args.grid, encoding="utf-8") as fh:
        grid = [classifiers.ModelSpec.from_dict(obj) for obj in json.load(fh)]
    ids, labels, X = load_features(args.features)
    train_keep = _partition_ids(args.plan, args.train_part)
    val_keep = _partition_ids(args.plan, args.val_part)
    _, y_tr, X_tr = _labeled_rows(ids, labels, X, train_keep)
    _, y_val, X_val = _labeled_rows(ids, labels, X, val_keep)
    best, table = classifiers.grid_search(grid, (X_tr, y_tr), (X_val, y_val),
                                          objective=args.objective)
    payload = {
        "best": best.to_dict(),
        "objective": args.objective,
        "table": [{**{k: v for k, v in row.items() if k != "spec"},
                   "spec": row["spec"].to_dict()} for row in table],
    }
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_run_record(args.out, argv, cfg, seed=None)
    print(f"tune: best spec is {best.family} "
          f"({args.objective}={max(r['objective'] for r in table if r['objective'] is not None):.4f})")
    return 0


def _cmd_cv(args, argv):
    cfg = load_config(args.config)
    spec = _load_spec(args.spec)
    ids, labels, X = load_features(args.features)
    kept_ids, y, Xk = _labeled_rows(ids, labels, X)
    plan = splits.load_plan(args.plan)
    result = classifiers.kfold_cv(spec, kept_ids, Xk, y, plan)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(result.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    _write_run_record(args.out, argv, cfg, seed=spec.seed)
    print(f"cv: mean bAcc {result.mean['bacc']:.4f} "
          f"(std {result.std['bacc']:.4f}) over {len(result.reports)} folds")
    return 0


def _cmd_eval(args, argv):
    cfg = load_config(args.config)
    model = classifiers.load_model(args.model)
    ids, labels, X = load_features(args.features)
    keep = _partition_ids(args.plan, args.part) if args.plan else None
    _, y, Xe = _labeled_rows(ids, labels, X, keep)
    if len(y) == 0:
        raise RuntimeError("no labeled rows to evaluate")
    layout_hash = _layout_hash_for_features(args.features)
    preds, _ = model.predict(Xe, layout_hash)
    report = metrics.evaluate(y, preds)
    metrics.save_report(report, args.out)
    _write_run_record(args.out, argv, cfg, seed=None)
    print(f"eval: acc {report.acc:.4f} bacc {report.bacc:.4f} "
          f"ooacc {report.ooacc:.4f} wooacc {report.wooacc:.4f}")
    return 0


def _cmd_agree(args, argv):
    cfg = load_config(args.config)
    ratings = merge_label_files(args.labels)
    results = {"n_subjects": len(ratings.subjects),
               "n_raters": len(ratings.raters),
               "n_shared_subjects": len(ratings.shared_subjects())}
    for name, fn in (("exact_agreement", metrics.exact_agreement),
                     ("offbyone_agreement", metrics.offbyone_agreement),
                     ("icc3", metrics.icc3),
                     ("krippendorff_alpha", metrics.krippendorff_alpha)):
        try:
            results[name] = fn(ratings)
        except metrics.UndefinedMetricError as exc:
            results[name] = None
            results[f"{name}_error"] = str(exc)
    text = json.dumps(results, indent=2, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _write_run_record(args.out, argv, cfg, seed=None)
    return 0


def _cmd_audit(args, argv):
    cfg = load_config(args.config)
    fc = _feature_config(cfg, args)
    manifest = load_manifest(args.manifest)
    model = classifiers.load_model(args.model)
    region = RegionKind.parse(args.region)
    report = audit_mod.audit_dataset(manifest, model, region, fc,
                                     mask_dir=args.mask_dir, bounds=cfg.seg,
                                     image_loader=_image_loader(cfg))
    palette = audit_mod.load_palette(cfg.palette)
    audit_mod.emit_report(report, args.format, args.out, palette=palette)
    _write_run_record(args.out, argv, cfg, seed=None)
    print(f"audit: classified {report.classified} images "
          f"({len(report.skipped)} skipped) -> {args.out}")
    return 0


def _cmd_serve(args, argv):
    from . import server as server_mod

    cfg = load_config(args.config)
    manifest_path = args.manifest or cfg.server.manifest
    if manifest_path is None:
        raise RuntimeError("serve needs --manifest or a server.manifest "
                           "config entry")
    manifest = load_manifest(manifest_path)
    palette = audit_mod.load_palette(cfg.palette)
    if args.port is not None:
        from dataclasses import replace
        cfg = replace(cfg, server=replace(cfg.server, port=args.port))
    server_mod.serve(cfg, manifest, palette)
    return 0


# ---------------------------------------------------------------------------
# Parser

def build_parser():
    parser = argparse.ArgumentParser(
        prog="skintone",
        description="Skin tone classification and dataset auditing toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", default=None,
                       help="toolkit config JSON (default: $STW_CONFIG)")

    p = sub.add_parser("extract", help="compute descriptor features for a manifest")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--region", default="full", help="full|face|skin")
    p.add_argument("--mask-dir", default=None)
    p.add_argument("--bins", type=int, default=None)
    p.set_defaults(fn=_cmd_extract)

    p = sub.add_parser("split", help="build an IMG/IND split, k folds, or a custom test")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("--mode", choices=("img", "ind"), default="ind")
    p.add_argument("--fractions", default="0.8,0.0,0.2")
    p.add_argument("--kfold", type=int, default=None)
    p.add_argument("--custom-test", type=int, default=None,
                   help="hold out N individuals per class")
    p.add_argument("--remainder-out", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_split)

    p = sub.add_parser("balance", help="cap images per individual")
    common(p)
    p.add_argument("--manifest", required=True)
    p.add_argument("-m", "--max-per-individual", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_balance)

    p = sub.add_parser("train", help="fit one model spec on cached features")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--spec", required=True, help="model spec JSON file")
    p.add_argument("--plan", default=None)
    p.add_argument("--train-part", default="train")
    p.add_argument("--val-part", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("tune", help="grid search over model specs")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--grid", required=True, help="JSON list of model specs")
    p.add_argument("--plan", required=True)
    p.add_argument("--train-part", default="train")
    p.add_argument("--val-part", default="val")
    p.add_argument("--objective", default="bacc")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_tune)

    p = sub.add_parser("cv", help="k-fold cross-validation of one spec")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--plan", required=True, help="fold plan from split --kfold")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_cv)

    p = sub.add_parser("eval", help="evaluate a model on a feature partition")
    common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--plan", default=None)
    p.add_argument("--part", default="test")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_eval)

    p = sub.add_parser("agree", help="inter-annotator agreement from label files")
    common(p)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=_cmd_agree)

    p = sub.add_parser("audit", help="MST distribution report for a manifest")
    common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--region", default="full")
    p.add_argument("--mask-dir", default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("json", "csv", "svg"), default="json")
    p.set_defaults(fn=_cmd_audit)

    p = sub.add_parser("serve", help="run the annotation backend")
    common(p)
    p.add_argument("--manifest", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=_cmd_serve)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, argv)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
