# MIT License
#
# Copyright (c) 2024 The fastswitch developers
#
# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:
#
# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.
#
# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

"""
Command line interface.

Exit codes: 0 on success, 2 when an adapter or its transport fails, 64
for usage and configuration errors and 65 for malformed input data.
"""

import argparse
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .adapters import FixtureBackend, OracleBackend, RemoteBackend, MockAdapterServer
from .analysis import compare_modes, format_table, mode_report, runtime_model_from_records
from .core import Mode, Query
from .core.serialization import canonical_dumps, write_json
from .data import (build_negative_triples, build_proposal_records, load_annotations, load_scenes, load_templates,
                   scenes_to_json, write_proposals, write_triples, DEFAULT_THRESHOLD)
from .metrics import load_mask_pairs, load_queries, mask_report, read_records, record_report, write_queries, write_records
from .pipeline import PipelineConfig, ForceMode, QueryTrace, load_config, run_batch, run_query
from .utils import AdapterError, ConfigError, InputError, UndefinedMetricError
from .utils import get_logger, is_positive_integer, log

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_ADAPTER = 2
EXIT_USAGE = 64
EXIT_DATA = 65

BACKEND_KINDS = ("remote", "fixture", "oracle")


class UsageError(Exception):
    pass


class _ArgumentParser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which is taken by adapter failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError("%s: error: %s" % (self.prog, message))


@dataclass
class RunSpec:
    """
    Everything a command needs to build a backend and run the pipeline.
    """

    backend: str
    endpoint: str = None
    fixtures: str = None
    scenes: str = None
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    parallelism: int = 1
    threshold: tuple = DEFAULT_THRESHOLD
    trace_dir: str = None
    out: str = None
    no_timestamps: bool = False

    def __post_init__(self):
        if self.backend not in BACKEND_KINDS:
            raise ConfigError("Expected backend kind in %s. Got %s" % (", ".join(BACKEND_KINDS), repr(self.backend)))

        sources = {"remote": self.endpoint, "fixture": self.fixtures, "oracle": self.scenes}
        if not sources[self.backend]:
            flag = {"remote": "--endpoint", "fixture": "--fixtures", "oracle": "--scenes"}[self.backend]
            raise ConfigError("Backend '%s' needs %s" % (self.backend, flag))
        extra = [kind for kind, source in sources.items() if source and kind != self.backend]
        if extra:
            raise ConfigError("Backend '%s' given together with sources for %s" % (self.backend, ", ".join(extra)))

        if not is_positive_integer(self.parallelism):
            raise ConfigError("Expected positive integer for --parallelism. Got %s" % str(self.parallelism))

    @classmethod
    def from_args(cls, args):
        pipeline = load_config(args.config) if args.config else PipelineConfig()
        return cls(backend=args.backend, endpoint=args.endpoint, fixtures=args.fixtures, scenes=args.scenes,
                   pipeline=pipeline, parallelism=getattr(args, "parallelism", 1),
                   threshold=(args.threshold_w, args.threshold_h), trace_dir=args.trace_dir,
                   out=getattr(args, "out", None), no_timestamps=args.no_timestamps)

    def make_backend(self):
        if self.backend == "remote":
            return RemoteBackend(self.endpoint)
        if self.backend == "fixture":
            return FixtureBackend.from_file(self.fixtures)
        return OracleBackend(load_scenes(self.scenes), threshold=self.threshold)


# ------------ ** Output helpers ** ----------------

def _emit_text(text, out=None):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(d, out=None):
    _emit_text(canonical_dumps(d).decode("utf-8") + "\n", out)


# ------------ ** Commands ** ----------------

def cmd_run(args):
    spec = RunSpec.from_args(args)
    query = Query(args.image, args.question, args.query_id)
    trace = QueryTrace(query)

    with spec.make_backend() as backend:
        try:
            answer = run_query(query, backend, spec.pipeline, trace)
        finally:
            if spec.trace_dir:
                trace.write(spec.trace_dir, spec.no_timestamps)

    if spec.no_timestamps:
        answer = replace(answer, latency_ms=0.0)

    _emit_json(answer.to_dict(), spec.out)
    return EXIT_OK


def cmd_batch(args):
    spec = RunSpec.from_args(args)
    queries, labels = load_queries(args.queries)

    with spec.make_backend() as backend:
        records = run_batch(queries, backend, spec.pipeline, spec.parallelism, labels, spec.trace_dir,
                            spec.no_timestamps)

    write_records(spec.out or sys.stdout, records)

    n_failed = sum(1 for r in records if r.failed)
    if n_failed:
        logger.warning("%d of %d queries failed", n_failed, len(records))
    return EXIT_OK


def mock_server(args):
    """
    Builds the serve-mock server. Request lines are logged at INFO, which is
    the level unless ``FAST_PIPELINE_LOG`` sets another.
    """
    if bool(args.fixtures) == bool(args.scenes):
        raise ConfigError("serve-mock needs exactly one of --fixtures and --scenes")

    if args.fixtures:
        backend = FixtureBackend.from_file(args.fixtures)
    else:
        backend = OracleBackend(load_scenes(args.scenes), threshold=(args.threshold_w, args.threshold_h))

    log.configure(default="INFO")
    return MockAdapterServer(backend, args.host, args.port)


def cmd_serve_mock(args):
    server = mock_server(args)
    sys.stderr.write("Serving adapter protocol on %s\n" % server.endpoint)
    sys.stderr.flush()
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down")
    return EXIT_OK


def _read_vocab(path):
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def cmd_build_dataset(args):
    ann = load_annotations(args.annotations)
    templates = load_templates(args.templates)
    vocab = _read_vocab(args.vocab) if args.vocab else ann.labels

    triples = build_negative_triples(ann, vocab, templates, (args.threshold_w, args.threshold_h), seed=args.seed,
                                     n_absent=args.n_absent, include_positive=args.include_positive)
    write_triples(args.out or sys.stdout, triples)

    if args.proposals_out:
        write_proposals(args.proposals_out, build_proposal_records(ann, templates,
                                                                   (args.threshold_w, args.threshold_h)))
    return EXIT_OK


def cmd_evaluate(args):
    if bool(args.records) == bool(args.masks):
        raise ConfigError("evaluate needs exactly one of --records and --masks")

    if args.records:
        report = record_report(read_records(args.records), args.metric or None)
    else:
        report = mask_report(load_mask_pairs(args.masks))

    _emit_json(report, args.out)
    return EXIT_OK


def _runtime_report(t_fast, t_slow, p_fast, results=None, measured=None, mode_split=None):
    rows = compare_modes(t_fast, t_slow, p_fast, results, measured)
    report = {"runtime": rows, "model": {"t_fast_ms": t_fast, "t_slow_ms": t_slow, "p_fast": p_fast}}
    if mode_split is not None:
        report["modes"] = mode_split
    return report


def cmd_analyze(args):
    if args.records:
        records = read_records(args.records)
        modes = mode_report(records, args.dataset)
        try:
            model = runtime_model_from_records(records)
        except UndefinedMetricError as e:
            logger.warning("Mode report only, no runtime table: %s", e)
            report = {"modes": modes.to_dict()}
        else:
            latencies = [r.latency_ms for r in records if not r.failed]
            results = {key: float(value) for key, value in
                       (("fast", modes.fast_acc), ("slow", modes.slow_acc), ("mixed", modes.overall_acc))
                       if value is not None}
            report = _runtime_report(model.t_fast_ms, model.t_slow_ms, model.p_fast, results,
                                     {"mixed": float(np.mean(latencies))}, modes.to_dict())
    else:
        if args.t_fast is None or args.t_slow is None or args.p_fast is None:
            raise ConfigError("analyze needs --records, or all of --t-fast, --t-slow and --p-fast")
        measured = {"mixed": args.measured_ms} if args.measured_ms is not None else None
        report = _runtime_report(args.t_fast, args.t_slow, args.p_fast, measured=measured)

    report["dataset"] = args.dataset
    if args.out:
        write_json(args.out, report)
    if "runtime" in report:
        sys.stdout.write(format_table(report["runtime"]))
    else:
        _emit_json(report["modes"])
    return EXIT_OK


def _mean_latency(records):
    values = [r.latency_ms for r in records if not r.failed]
    if not values:
        raise AdapterError("Every query failed during the benchmark")
    return float(np.mean(values))


def cmd_bench(args):
    spec = RunSpec.from_args(args)
    queries, labels = load_queries(args.queries)

    runs = {}
    with spec.make_backend() as backend:
        for force in (ForceMode.FAST, ForceMode.SLOW, ForceMode.AUTO):
            cfg = spec.pipeline.replace(force_mode=force.value)
            runs[force] = run_batch(queries, backend, cfg, spec.parallelism, labels)

    auto = [r for r in runs[ForceMode.AUTO] if not r.failed]
    p_fast = sum(1 for r in auto if r.mode == Mode.FAST) / len(auto) if auto else 0.0

    t_fast = _mean_latency(runs[ForceMode.FAST])
    t_slow = _mean_latency(runs[ForceMode.SLOW])

    results = None
    if all(label.gold for label in labels.values()) and labels:
        results = {key: record_report(runs[force], ["accuracy"])["accuracy"]
                   for key, force in (("fast", ForceMode.FAST), ("slow", ForceMode.SLOW), ("mixed", ForceMode.AUTO))}

    report = _runtime_report(t_fast, t_slow, p_fast, results, {"mixed": _mean_latency(runs[ForceMode.AUTO])})
    report["dataset"] = args.dataset
    if spec.out:
        write_json(spec.out, report)
    sys.stdout.write(format_table(report["runtime"]))
    return EXIT_OK


def cmd_synth(args):
    from .data.synthetic import generate_corpus

    corpus = generate_corpus(args.n_scenes, seed=args.seed, threshold=(args.threshold_w, args.threshold_h))
    write_json(args.scenes, scenes_to_json(corpus.scenes))
    write_queries(args.out, corpus.queries, corpus.labels)
    return EXIT_OK


# ------------ ** Argument parsing ** ----------------

def _add_threshold(p):
    p.add_argument("--threshold-w", type=int, default=DEFAULT_THRESHOLD[0], help="Visibility threshold width in pixels")
    p.add_argument("--threshold-h", type=int, default=DEFAULT_THRESHOLD[1], help="Visibility threshold height in pixels")


def _add_backend(p):
    p.add_argument("--backend", required=True, choices=BACKEND_KINDS, help="Adapter backend kind")
    p.add_argument("--endpoint", help="Base URL of a remote adapter service")
    p.add_argument("--fixtures", help="Fixture file for the fixture backend")
    p.add_argument("--scenes", help="Scene file for the oracle backend")
    p.add_argument("--config", help="Pipeline configuration JSON")
    p.add_argument("--trace-dir", help="Directory for per-query trace files")
    p.add_argument("--no-timestamps", action="store_true", help="Zero all timestamps and latencies in the output")
    _add_threshold(p)


def build_parser():
    parser = _ArgumentParser(prog="fastswitch", description="Dual-mode visual agent pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="Answer one query")
    _add_backend(p_run)
    p_run.add_argument("--image", required=True, help="Image reference")
    p_run.add_argument("--question", required=True, help="Question text")
    p_run.add_argument("--query-id", default="q0", help="Query identifier")
    p_run.add_argument("--out", help="Write the answer JSON here instead of stdout")
    p_run.set_defaults(func=cmd_run)

    p_batch = sub.add_parser("batch", help="Answer a JSON Lines file of queries")
    _add_backend(p_batch)
    p_batch.add_argument("--queries", required=True, help="JSON Lines queries with optional gold answers")
    p_batch.add_argument("--out", help="Output JSON Lines records, stdout by default")
    p_batch.add_argument("--parallelism", type=int, default=1, help="Maximum concurrent queries")
    p_batch.set_defaults(func=cmd_batch)

    p_serve = sub.add_parser("serve-mock", help="Serve fixtures or scenes over the adapter protocol")
    p_serve.add_argument("--fixtures", help="Fixture file to serve")
    p_serve.add_argument("--scenes", help="Scene file to serve through the oracle")
    p_serve.add_argument("--host", default="127.0.0.1", help="Bind host")
    p_serve.add_argument("--port", type=int, default=8765, help="Bind port")
    _add_threshold(p_serve)
    p_serve.set_defaults(func=cmd_serve_mock)

    p_build = sub.add_parser("build-dataset", help="Build negative triples and proposal records")
    p_build.add_argument("--annotations", required=True, help="Annotation JSON")
    p_build.add_argument("--vocab", help="Object vocabulary, one label per line")
    p_build.add_argument("--templates", help="Question template JSON")
    p_build.add_argument("--out", help="Output JSON Lines triples, stdout by default")
    p_build.add_argument("--proposals-out", help="Output JSON Lines proposal records")
    p_build.add_argument("--seed", type=int, default=0, help="Random seed")
    p_build.add_argument("--n-absent", type=int, default=1, help="Absent labels sampled per image")
    p_build.add_argument("--include-positive", action="store_true", help="Also emit positive triples")
    _add_threshold(p_build)
    p_build.set_defaults(func=cmd_build_dataset)

    p_eval = sub.add_parser("evaluate", help="Score records or mask pairs")
    p_eval.add_argument("--records", help="JSON Lines evaluation records")
    p_eval.add_argument("--masks", help="Mask-pair manifest")
    p_eval.add_argument("--metric", action="append", choices=("accuracy", "pope", "mme"),
                        help="Metric to compute, may be repeated")
    p_eval.add_argument("--out", help="Output report JSON, stdout by default")
    p_eval.set_defaults(func=cmd_evaluate)

    p_analyze = sub.add_parser("analyze", help="Mode split and runtime comparison")
    p_analyze.add_argument("--records", help="JSON Lines evaluation records")
    p_analyze.add_argument("--t-fast", type=float, help="Fast-mode latency in ms")
    p_analyze.add_argument("--t-slow", type=float, help="Slow-mode latency in ms")
    p_analyze.add_argument("--p-fast", type=float, help="Share of fast-mode queries")
    p_analyze.add_argument("--measured-ms", type=float, help="Measured mean latency of the switching system")
    p_analyze.add_argument("--dataset", default="", help="Dataset name for the report")
    p_analyze.add_argument("--out", help="Output report JSON")
    p_analyze.set_defaults(func=cmd_analyze)

    p_bench = sub.add_parser("bench", help="Measure fast-only, slow-only and switching runtimes")
    _add_backend(p_bench)
    p_bench.add_argument("--queries", required=True, help="JSON Lines queries")
    p_bench.add_argument("--parallelism", type=int, default=1, help="Maximum concurrent queries")
    p_bench.add_argument("--dataset", default="", help="Dataset name for the report")
    p_bench.add_argument("--out", help="Output report JSON")
    p_bench.set_defaults(func=cmd_bench)

    p_synth = sub.add_parser("synth", help="Generate a synthetic scene corpus with queries")
    p_synth.add_argument("--n-scenes", type=int, default=200, help="Number of scenes")
    p_synth.add_argument("--seed", type=int, default=0, help="Random seed")
    p_synth.add_argument("--scenes", required=True, help="Output scene JSON")
    p_synth.add_argument("--out", required=True, help="Output JSON Lines queries with gold answers")
    _add_threshold(p_synth)
    p_synth.set_defaults(func=cmd_synth)

    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except UsageError as e:
        sys.stderr.write("%s\n" % e)
        return EXIT_USAGE

    try:
        return args.func(args)
    except AdapterError as e:
        sys.stderr.write("adapter failure: %s\n" % e)
        return EXIT_ADAPTER
    except ConfigError as e:
        sys.stderr.write("usage error: %s\n" % e)
        return EXIT_USAGE
    except (InputError, OSError) as e:
        sys.stderr.write("data error: %s\n" % e)
        return EXIT_DATA
