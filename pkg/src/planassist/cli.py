"""Command-line entry points.

Offline commands (ingest, seed-demo, train, backtest, export-kg,
al-suggest) operate directly on a store directory; `serve` starts the
HTTP service over the same data.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from . import __version__
from .active_learning import CommitteeConfig
from .errors import AssistantError, InsufficientDataError
from .forecasting import DEFAULT_CALENDAR, ModelSpec, backtest, load_models, save_model, train
from .ingestion import (
    generate_synthetic,
    load_demand_history,
    load_store,
    load_transports,
    write_demand_csv,
    write_transports_csv,
)
from .kg import KnowledgeGraph


def _parse_lags(raw: str) -> tuple[int, ...]:
    return tuple(int(piece) for piece in raw.split(","))


def cmd_ingest(args) -> int:
    observations = load_demand_history(args.demand)
    transports = load_transports(args.transports) if args.transports else []
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_demand_csv(observations, out / "demand.csv")
    write_transports_csv(transports, out / "transports.csv")
    print(f"ingested {len(observations)} observations, {len(transports)} transports -> {out}")
    return 0


def cmd_seed_demo(args) -> int:
    observations, transports = generate_synthetic(
        args.materials, args.clients, args.series, args.days, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_demand_csv(observations, out / "demand.csv")
    write_transports_csv(transports, out / "transports.csv")
    print(f"seeded {args.series} series x {args.days} days "
          f"({len(observations)} rows), {len(transports)} transports -> {out}")
    return 0


def _spec_from(args) -> ModelSpec:
    calendar = DEFAULT_CALENDAR if args.calendar else ()
    return ModelSpec(lags=_parse_lags(args.lags), calendar_features=calendar,
                     regularization=args.reg)


def cmd_train(args) -> int:
    store, _ = load_store(args.store)
    spec = _spec_from(args)
    out = Path(args.out)
    trained = skipped = 0
    for series in store.series():
        try:
            model = train(store, series, spec, args.seed)
        except InsufficientDataError:
            skipped += 1
            continue
        save_model(model, out)
        trained += 1
    print(f"trained {trained} models ({skipped} skipped) -> {out}")
    return 0


def cmd_backtest(args) -> int:
    store, _ = load_store(args.store)
    spec = _spec_from(args)
    writer = csv.writer(sys.stdout if args.out is None else open(args.out, "w", newline=""))
    writer.writerow(["series", "material_id", "client_id", "mae", "baseline_mae"])
    skipped = 0
    for series in store.series():
        try:
            report = backtest(store, series, spec, args.folds, args.seed, horizon=args.horizon)
        except InsufficientDataError:
            skipped += 1
            continue
        writer.writerow([str(series), series.material_id, series.client_id,
                         f"{report.mae:.6f}", f"{report.baseline_mae:.6f}"])
    if skipped:
        print(f"skipped {skipped} series with insufficient history", file=sys.stderr)
    return 0


def cmd_export_kg(args) -> int:
    log_path = Path(args.store) / "kg.log"
    graph = KnowledgeGraph(log_path=log_path) if log_path.exists() else KnowledgeGraph()
    graph.export_ntriples(args.out)
    print(f"exported {graph.triple_count()} relation triples, "
          f"{graph.entity_count()} entities -> {args.out}")
    return 0


def cmd_al_suggest(args) -> int:
    from .service.state import AppState

    store, transports = load_store(args.store)
    models = load_models(args.models)
    state = AppState(store, transports, models,
                     committee_config=CommitteeConfig(committee_size=args.committee,
                                                      seed=args.seed))
    batch = state.al_suggestions(args.k)
    writer = csv.writer(sys.stdout if args.out is None else open(args.out, "w", newline=""))
    writer.writerow(["rank", "target_kind", "target_id", "informativeness", "rationale"])
    for i, candidate in enumerate(batch, start=1):
        writer.writerow([i, candidate.target_kind, candidate.target_id,
                         f"{candidate.informativeness:.6f}", candidate.rationale])
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import create_app
    from .service.state import build_state

    state = build_state(args.store, args.models)
    app = create_app(state, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="assistant",
                                     description="demand-planning decision assistant")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate CSV extracts into a store directory")
    p.add_argument("--demand", required=True)
    p.add_argument("--transports", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("seed-demo", help="generate synthetic demand at a chosen scale")
    p.add_argument("--materials", type=int, default=279)
    p.add_argument("--clients", type=int, default=149)
    p.add_argument("--series", type=int, default=516)
    p.add_argument("--days", type=int, default=1095)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_seed_demo)

    p = sub.add_parser("train", help="train one model per series")
    p.add_argument("--store", required=True)
    p.add_argument("--lags", default="1,2,7,14,28")
    p.add_argument("--reg", type=float, default=0.1)
    p.add_argument("--no-calendar", dest="calendar", action="store_false")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("backtest", help="expanding-window evaluation per series (CSV report)")
    p.add_argument("--store", required=True)
    p.add_argument("--lags", default="1,2,7,14,28")
    p.add_argument("--reg", type=float, default=0.1)
    p.add_argument("--no-calendar", dest="calendar", action="store_false")
    p.add_argument("--folds", type=int, default=3)
    p.add_argument("--horizon", type=int, default=7)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_backtest)

    p = sub.add_parser("export-kg", help="export the store's knowledge graph as N-Triples")
    p.add_argument("--store", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export_kg)

    p = sub.add_parser("al-suggest", help="rank the most informative items to ask users about")
    p.add_argument("--store", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--committee", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_al_suggest)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store", required=True)
    p.add_argument("--models", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", default=None, help="directory with the built web UI")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AssistantError as exc:
        print(f"error [{exc.code}]: {exc.message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
