"""Command-line interface: ingest raw CDR files, generate synthetic traffic,
train the neural models, fit the ARIMA baseline, and run the three-way
comparison that emits plot-ready prediction and error-curve CSVs.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

import argparse
import os
import sys
import time

import numpy as np

from . import arima, cdr, dataset, ffnn, lstm, modelio, train

DEFAULT_SEED = int(os.environ.get("CELLTIDE_SEED", "0"))


def _write_predictions(path: str, slots, truth, preds) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("slot,truth,prediction\n")
        for s, t, p in zip(slots, truth, preds):
            fh.write(f"{s},{t:.17g},{p:.17g}\n")


def _load_series(path: str) -> cdr.ActivitySeries:
    return cdr.read_series_csv(path)


def _split_and_scale(values: np.ndarray, train_frac: float):
    spec = dataset.split(len(values), train_frac)
    scaler = dataset.fit_scaler(values[:spec.n_train])
    return spec, scaler


def _window_sets(values: np.ndarray, spec, scaler, window_len: int):
    normed = scaler.transform(values)
    train_set = dataset.windows_for_range(normed, window_len, 0, spec.n_train)
    val_set = dataset.windows_for_range(normed, window_len, spec.val_start,
                                        spec.test_start)
    return train_set, val_set


def cmd_synth(args) -> int:
    series = dataset.gen_synthetic(args.days, seed=args.seed)
    cdr.write_series_csv(series, args.out)
    print(f"wrote {len(series)} slots to {args.out}")
    return 0


def cmd_ingest(args) -> int:
    series = cdr.ingest_dir(args.input_dir, args.grid, args.channel)
    cdr.write_series_csv(series, args.out)
    print(f"{len(series)} slots")
    return 0


def cmd_train(args) -> int:
    series = _load_series(args.series)
    spec, scaler = _split_and_scale(series.values, args.train_frac)
    print(f"split {spec.n_train}/{spec.n_val}/{spec.n_test}")
    train_set, val_set = _window_sets(series.values, spec, scaler, args.window)
    config = train.TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                               seed=args.seed, window=args.window)
    params, history = train.train_model(args.model, train_set, val_set, config)
    if args.model == "lstm":
        text = lstm.serialize(params, args.window, scaler)
    else:
        text = ffnn.serialize(params, scaler)
    with open(args.out_model, "w", encoding="utf-8") as fh:
        fh.write(text)
    history.write_csv(args.out_history)
    print(f"final val MAE (normalized) {history.final_val_mae:.6f}")
    return 0


def cmd_arima(args) -> int:
    series = _load_series(args.series)
    values = series.values
    spec = dataset.split(len(values), args.train_frac)
    train_slice = values[:spec.n_train]
    if args.auto:
        p, d, q = arima.auto_order(train_slice)
        print(f"selected order ({p},{d},{q})")
    else:
        p, d, q = args.p, args.d, args.q
    model = arima.fit(train_slice, p, d, q)
    test_stop = spec.test_start + spec.n_test
    preds = arima.rolling_forecast(model, values, (spec.test_start, test_stop))
    slots = np.arange(spec.test_start, test_stop)
    with open(args.out_model, "w", encoding="utf-8") as fh:
        fh.write(arima.serialize(model))
    _write_predictions(args.out_predictions, slots, values[slots], preds)
    print(f"test MAE {train.mae(preds, values[slots]):.6f}")
    return 0


def cmd_compare(args) -> int:
    series = _load_series(args.series)
    values = series.values
    spec, scaler = _split_and_scale(values, args.train_frac)
    print(f"split {spec.n_train}/{spec.n_val}/{spec.n_test}")
    train_set, val_set = _window_sets(values, spec, scaler, args.window)
    config = train.TrainConfig(epochs=args.epochs, learning_rate=args.lr,
                               seed=args.seed, window=args.window)
    os.makedirs(args.out_dir, exist_ok=True)
    written = []
    scale = scaler.max - scaler.min
    report = {
        "seed": args.seed,
        "config": {"train_frac": args.train_frac, "window": args.window,
                   "epochs": args.epochs, "learning_rate": args.lr,
                   "batch_size": config.batch_size,
                   "n_train": spec.n_train, "n_val": spec.n_val,
                   "n_test": spec.n_test},
        "models": {},
    }

    def out(name):
        path = os.path.join(args.out_dir, name)
        written.append(path)
        return path

    try:
        for kind in ("lstm", "ffnn"):
            t0 = time.perf_counter()
            params, history = train.train_model(kind, train_set, val_set, config)
            wall_ms = (time.perf_counter() - t0) * 1e3
            history.write_csv(out(f"{kind}_history.csv"))
            slots, preds, test_mae = train.evaluate(
                kind, params, values, spec, args.window, scaler)
            _write_predictions(out(f"{kind}_predictions.csv"),
                               slots, values[slots], preds)
            report["models"][kind] = {
                "test_mae": test_mae,
                "test_mae_normalized": test_mae / scale,
                "epochs": len(history),
                "train_wall_ms": wall_ms,
            }
            print(f"{kind}: test MAE {test_mae:.6f}")

        t0 = time.perf_counter()
        train_slice = values[:spec.n_train]
        if args.p is None:
            p, d, q = arima.auto_order(train_slice)
            print(f"arima: selected order ({p},{d},{q})")
        else:
            p, d, q = args.p, args.d, args.q
        model = arima.fit(train_slice, p, d, q)
        wall_ms = (time.perf_counter() - t0) * 1e3
        test_stop = spec.test_start + spec.n_test
        slots = np.arange(spec.test_start, test_stop)
        preds = arima.rolling_forecast(model, values, (spec.test_start, test_stop))
        _write_predictions(out("arima_predictions.csv"), slots, values[slots], preds)
        test_mae = train.mae(preds, values[slots])
        report["models"]["arima"] = {
            "order": [p, d, q],
            "test_mae": test_mae,
            "test_mae_normalized": test_mae / scale,
            "train_wall_ms": wall_ms,
        }
        print(f"arima: test MAE {test_mae:.6f}")

        with open(out("report.json"), "w", encoding="utf-8") as fh:
            fh.write(modelio.dumps(report))
    except Exception:
        for path in written:  # no partial result directories
            if os.path.exists(path):
                os.remove(path)
        raise
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="celltide",
        description="Univariate cellular traffic forecasting toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common_train_flags(p):
        p.add_argument("--series", required=True, help="series CSV (slot,timestamp_ms,value)")
        p.add_argument("--train-frac", type=float, default=0.8)
        p.add_argument("--window", type=int, default=12)
        p.add_argument("--epochs", type=int, default=20)
        p.add_argument("--lr", type=float, default=1e-3)
        p.add_argument("--seed", type=int, default=DEFAULT_SEED)

    p = sub.add_parser("synth", help="generate a synthetic diurnal traffic series")
    p.add_argument("--days", type=int, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse a directory of raw CDR day-files")
    p.add_argument("--input-dir", required=True)
    p.add_argument("--grid", type=int, default=1)
    p.add_argument("--channel", choices=cdr.CHANNELS, default="internet")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train the LSTM or feed-forward model")
    p.add_argument("--model", choices=("lstm", "ffnn"), required=True)
    add_common_train_flags(p)
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-history", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("arima", help="fit the ARIMA baseline and forecast the test slice")
    p.add_argument("--series", required=True)
    p.add_argument("--train-frac", type=float, default=0.8)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--auto", action="store_true", help="AIC grid search for (p,d,q)")
    p.add_argument("--p", type=int, default=1)
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--out-model", required=True)
    p.add_argument("--out-predictions", required=True)
    p.set_defaults(func=cmd_arima)

    p = sub.add_parser("compare", help="LSTM vs FFNN vs ARIMA under one split")
    add_common_train_flags(p)
    p.add_argument("--p", type=int, default=None, help="ARIMA order; omitted = AIC auto")
    p.add_argument("--d", type=int, default=0)
    p.add_argument("--q", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (cdr.ParseError, cdr.IngestError, arima.ArimaFitError,
            train.TrainingDiverged, modelio.ModelFormatError,
            ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
