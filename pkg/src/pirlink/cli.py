"""Command-line pipeline: ingest, classify, graph, link, analyze, synth, score, all.

Settings come from one TOML file (``--config``) with command-line flags
taking precedence. Every command writes its artifacts under ``--out`` plus a
``manifest-<command>.json`` recording the effective configuration, input
digests and library versions. A manifest can be passed back as ``--config``
to repeat the run.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import platform
import shutil
import sys
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .analytics import (
    SELECTORS,
    PopulationTable,
    age_distributions,
    age_summary_csv,
    ages_csv,
    covariate_shares,
    edition_totals,
    mobility_csv,
    mobility_matrices,
    prefecture_csv,
    prefecture_distribution,
    representation_csv,
    representation_rate,
    shares_csv,
    transmission_csv,
    transmission_table,
)
from .core import EditionId
from .family import HISTOGRAM_PANELS, build_graph, family_composition_histograms, graph_edges_csv, histogram_csv
from .ingest import (
    IngestError,
    attrition_csv,
    attrition_reasons_csv,
    clean,
    parse_header,
    read_edition,
    serialize_edition,
)
from .linker import link_editions, links_csv, pair_census, read_links
from .normalize import Classifier, classify_records
from .synth import GroundTruth, SynthParams, generate, score_csv, score_linkage
from .tabular import to_csv

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

log = logging.getLogger("pirlink")

COMMANDS = ("ingest", "classify", "graph", "link", "analyze", "synth", "score", "all")

DEFAULTS = {
    "editions": None,  # directory of edition files, or a table edition -> path
    "tables": None,  # directory of keyword tables overriding the packaged ones
    "charmap": None,
    "population": None,
    "links": None,
    "truth": None,
    "input": None,  # stage input directory for single-stage runs
    "out": "pirlink-out",
    "include_ambiguous": False,
    "same_edition": False,
    "restrict_father_age": None,
    "include_illegitimate": False,
    "seed": 0,
    "jobs": 1,
    "synth": {},
}
PATH_KEYS = ("editions", "tables", "charmap", "population", "links", "truth", "input", "out")
# settings that never change output bytes stay out of the manifest
RUN_ONLY = ("out", "jobs")


class MissingInput(Exception):
    def __init__(self, path, what):
        super().__init__(f"missing {what}: {path}")
        self.path = str(path)


# -- configuration ---------------------------------------------------------

def load_config(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise MissingInput(path, "config file")
    if path.suffix == ".json":
        # a run manifest; its paths are already absolute
        return dict(json.loads(path.read_text(encoding="utf-8"))["config"])
    with path.open("rb") as fh:
        raw = tomllib.load(fh)
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    base = path.parent
    for key in PATH_KEYS:
        value = raw.get(key)
        if isinstance(value, str):
            raw[key] = str((base / value).resolve())
        elif isinstance(value, dict):
            raw[key] = {k: str((base / v).resolve()) for k, v in value.items()}
    return raw


def effective_config(args) -> dict:
    config = {k: (dict(v) if isinstance(v, dict) else v) for k, v in DEFAULTS.items()}
    if args.config:
        config.update(load_config(args.config))
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None and key != "synth":
            config[key] = str(Path(value).resolve()) if key in PATH_KEYS else value
    for item in args.set or ():
        key, _, value = item.partition("=")
        if not key or not _:
            raise ValueError(f"--set expects key=value, got {item!r}")
        config["synth"][key] = json.loads(value)
    return config


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


# -- run state -------------------------------------------------------------

class Run:
    def __init__(self, command: str, config: dict, jobs: int):
        self.command = command
        self.config = config
        self.jobs = max(1, int(jobs))
        self.out = Path(config["out"])
        self.inputs = {}
        self.notices = []
        self.stage_name = None

    def input(self, path, what: str) -> Path:
        path = Path(path)
        if not path.exists():
            raise MissingInput(path, what)
        if path.is_file() and not self._inside_out(path):
            self.inputs[str(path)] = _digest(path)
        return path

    def _inside_out(self, path: Path) -> bool:
        try:
            path.resolve().relative_to(self.out.resolve())
            return True
        except ValueError:
            return False

    def notice(self, message: str):
        sys.stderr.write(f"notice: {message}\n")
        self.notices.append(message)

    def map(self, fn, items):
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))

    @contextmanager
    def stage(self, name: str):
        """Fresh output directory for one stage; a ``.partial`` marker stays behind on failure."""
        self.stage_name = name
        directory = self.out / name
        if directory.exists():
            shutil.rmtree(directory)
        directory.mkdir(parents=True)
        marker = directory / ".partial"
        marker.write_text(f"stage {name} did not finish\n", encoding="utf-8")
        yield directory
        marker.unlink()

    def write(self, directory: Path, name: str, text: str) -> Path:
        path = directory / name
        path.write_text(text, encoding="utf-8")
        return path

    def manifest(self) -> dict:
        outputs = {}
        for path in sorted(self.out.rglob("*")):
            if path.is_file() and not path.name.startswith(("manifest-", "error.json")):
                outputs[path.relative_to(self.out).as_posix()] = _digest(path)
        return {
            "command": self.command,
            "config": {k: v for k, v in sorted(self.config.items()) if k not in RUN_ONLY},
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": outputs,
            "notices": self.notices,
            "versions": {"pirlink": __version__, "python": platform.python_version(), "numpy": np.__version__},
        }


# -- record files ----------------------------------------------------------

def _edition_files(run: Run) -> dict[int, Path]:
    given = run.config["editions"]
    if given is None:
        raise ValueError("no editions configured (set `editions` or pass --editions)")
    if isinstance(given, dict):
        files = {EditionId.parse(int(k)).value: run.input(v, f"edition {k} file") for k, v in given.items()}
        return dict(sorted(files.items()))
    return _scan(run.input(given, "editions directory"), run)


def _scan(directory: Path, run: Run) -> dict[int, Path]:
    if not directory.is_dir():
        raise MissingInput(directory, "editions directory")
    files = {}
    for path in sorted(directory.glob("*.txt")):
        with path.open(encoding="utf-8") as fh:
            header = parse_header(fh.readline())
        ed = header.edition.value
        if ed in files:
            raise IngestError(f"edition {ed} appears in both {files[ed]} and {path}")
        files[ed] = run.input(path, f"edition {ed} file")
    if not files:
        raise MissingInput(directory, "edition files (*.txt)")
    return dict(sorted(files.items()))


def _write_records(run: Run, directory: Path, by_edition: dict, sources: dict):
    for ed, records in by_edition.items():
        run.write(directory, f"edition_{ed:02d}.txt", serialize_edition(records, EditionId(ed), sources.get(ed)))


def _load_stage(run: Run, default_stage: str) -> tuple[dict, dict]:
    directory = Path(run.config["input"]) if run.config["input"] else run.out / default_stage
    files = _scan(run.input(directory, f"{default_stage} output directory"), run)

    def load(item):
        ed, path = item
        parsed = read_edition(path, EditionId(ed))
        if parsed.line_errors:
            raise IngestError(f"{path}: {len(parsed.line_errors)} malformed lines in stage output")
        return ed, parsed.records, parsed.header.source

    loaded = run.map(load, files.items())
    return {ed: rs for ed, rs, _ in loaded}, {ed: src for ed, _, src in loaded}


def _flatten(by_edition: dict) -> list:
    return [r for ed in sorted(by_edition) for r in by_edition[ed]]


# -- stages ----------------------------------------------------------------

def stage_ingest(run: Run):
    files = _edition_files(run)

    def parse(item):
        ed, path = item
        parsed = read_edition(path, EditionId(ed))
        records, report = clean(parsed)
        return ed, records, report, parsed.header.source

    results = run.map(parse, files.items())
    with run.stage("ingest") as d:
        reports = [rep for _, _, rep, _ in results]
        run.write(d, "attrition.csv", attrition_csv(reports))
        run.write(d, "attrition_reasons.csv", attrition_reasons_csv(reports))
        errors = [(rep.edition.value, line, msg) for rep in reports for line, msg in rep.line_errors]
        run.write(d, "line_errors.csv", to_csv(["edition", "line", "message"], errors))
        by_ed = {ed: rs for ed, rs, _, _ in results}
        sources = {ed: src for ed, _, _, src in results}
        _write_records(run, d, by_ed, sources)
    return by_ed, sources


def _classifier(run: Run) -> Classifier:
    tables = run.config["tables"]
    charmap = run.config["charmap"]
    if tables:
        directory = run.input(tables, "keyword table directory")
        for path in sorted(directory.glob("*.csv")):
            run.input(path, "keyword table")
    if charmap:
        run.input(charmap, "char map")
    return Classifier.from_directory(tables, charmap)


def stage_classify(run: Run, by_ed=None, sources=None):
    if by_ed is None:
        by_ed, sources = _load_stage(run, "ingest")
    clf = _classifier(run)
    classified = dict(zip(by_ed, run.map(lambda rs: classify_records(rs, clf), by_ed.values())))
    with run.stage("classify") as d:
        _write_records(run, d, classified, sources)
    return classified, sources


def stage_graph(run: Run, by_ed=None):
    if by_ed is None:
        by_ed, _ = _load_stage(run, "classify")
    graphs = dict(zip(by_ed, run.map(build_graph, by_ed.values())))
    hist = family_composition_histograms(
        _flatten(by_ed), run.config["restrict_father_age"], run.config["include_illegitimate"]
    )
    with run.stage("graph") as d:
        problems = []
        for ed, graph in graphs.items():
            run.write(d, f"edges_{ed:02d}.csv", graph_edges_csv(graph))
            problems += [(ed, p) for p in graph.violations()]
        if problems:
            raise ValueError(f"family graph invariant broken: {problems[0][1]} (edition {problems[0][0]})")
        nodes = [(ed, len(g.parent_nodes), len(g.individual_nodes), len(g.child_nodes), len(g.edges))
                 for ed, g in graphs.items()]
        run.write(d, "graph_sizes.csv", to_csv(["edition", "parents", "individuals", "children", "edges"], nodes))
        for panel in HISTOGRAM_PANELS:
            run.write(d, f"birth_order_{panel}.csv", histogram_csv(hist.panel(panel)))
        unordered = [(ed, hist.families[ed], hist.unordered[ed]) for ed in sorted(hist.families)]
        run.write(d, "birth_order_coverage.csv", to_csv(["edition", "families", "children_without_year"], unordered))


def stage_link(run: Run, by_ed=None):
    if by_ed is None:
        by_ed, _ = _load_stage(run, "classify")
    records = _flatten(by_ed)
    links = link_editions(records, same_edition=run.config["same_edition"])
    with run.stage("link") as d:
        run.write(d, "links.csv", links_csv(links))
        sons, daughters = pair_census(records)
        ambiguous = sum(1 for l in links if l.ambiguous)
        run.write(
            d, "link_summary.csv",
            to_csv(["father_son_pairs", "father_daughter_pairs", "links", "ambiguous_links"],
                   [(sons, daughters, len(links), ambiguous)]),
        )
    return links


def stage_analyze(run: Run, by_ed=None, links=None):
    if by_ed is None:
        by_ed, _ = _load_stage(run, "classify")
    records = _flatten(by_ed)
    if links is None:
        links = _links_input(run, required=False)
    pop = None
    if run.config["population"]:
        pop = PopulationTable.from_csv(run.input(run.config["population"], "population table"))
    totals = edition_totals(records)
    with run.stage("analyze") as d:
        if pop is None:
            run.notice("no population table: representation rates and per-capita prefecture shares skipped")
        else:
            run.write(d, "representation.csv", representation_csv(representation_rate(totals, pop)))
        run.write(d, "prefecture.csv", prefecture_csv(prefecture_distribution(records, pop)))
        run.write(d, "mobility.csv", mobility_csv(mobility_matrices(records)))
        shares = {sel: covariate_shares(records, sel) for sel in SELECTORS}
        run.write(d, "covariate_shares.csv", shares_csv(shares))
        ages = age_distributions(records)
        run.write(d, "ages.csv", ages_csv(ages))
        run.write(d, "age_summary.csv", age_summary_csv(ages))
        hist = family_composition_histograms(
            records, run.config["restrict_father_age"], run.config["include_illegitimate"]
        )
        for panel in HISTOGRAM_PANELS:
            run.write(d, f"birth_order_{panel}.csv", histogram_csv(hist.panel(panel)))
        if links is None:
            run.notice("no links file: transmission table skipped")
        else:
            table = transmission_table(links, totals, run.config["include_ambiguous"])
            run.write(d, "transmission.csv", transmission_csv(table))
        run.write(d, "notices.txt", "".join(n + "\n" for n in run.notices))


def _links_input(run: Run, required: bool):
    path = run.config["links"]
    if path is None:
        default = run.out / "link" / "links.csv"
        if default.exists():
            return read_links(default)
        if required:
            raise MissingInput(default, "links file")
        return None
    return read_links(run.input(path, "links file"))


def stage_score(run: Run, links=None, world_id: Optional[str] = None):
    if run.config["truth"] is None:
        raise ValueError("no ground truth configured (set `truth` or pass --truth)")
    truth_dir = run.input(run.config["truth"], "truth directory")
    for name in ("persons.csv", "records.csv", "edges.csv", "world.json"):
        if (truth_dir / name).exists():
            run.input(truth_dir / name, "truth table")
    truth = GroundTruth.read(truth_dir)
    if links is None:
        links = _links_input(run, required=True)
    score = score_linkage(links, truth, world_id)
    with run.stage("score") as d:
        run.write(d, "score.csv", score_csv(score))
    return score


def stage_synth(run: Run):
    values = dict(run.config["synth"])
    values["seed"] = run.config["seed"]
    params = SynthParams.from_mapping(values)
    world = generate(params)
    for sub in ("editions", "truth"):
        if (run.out / sub).exists():
            shutil.rmtree(run.out / sub)
    run.stage_name = "synth"
    world.write(run.out)
    log.info("world %s written to %s", world.world_id, run.out)
    return world


def _common_source(sources: dict) -> Optional[str]:
    values = set(sources.values())
    return values.pop() if len(values) == 1 and None not in values else None


def run_command(command: str, run: Run):
    if command == "ingest":
        stage_ingest(run)
    elif command == "classify":
        stage_classify(run)
    elif command == "graph":
        stage_graph(run)
    elif command == "link":
        stage_link(run)
    elif command == "analyze":
        stage_analyze(run)
    elif command == "synth":
        stage_synth(run)
    elif command == "score":
        stage_score(run)
    elif command == "all":
        by_ed, sources = stage_ingest(run)
        by_ed, sources = stage_classify(run, by_ed, sources)
        stage_graph(run, by_ed)
        links = stage_link(run, by_ed)
        stage_analyze(run, by_ed, links)
        if run.config["truth"] is not None:
            stage_score(run, links, _common_source(sources))
    else:
        raise ValueError(f"unknown command {command!r}")


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pirlink", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="TOML config file, or a run manifest to repeat")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--editions", help="directory of edition files")
    parser.add_argument("--input", help="stage input directory (defaults to the previous stage under --out)")
    parser.add_argument("--tables", help="directory of keyword tables")
    parser.add_argument("--charmap", help="char map CSV")
    parser.add_argument("--population", help="population CSV (year,scope,population)")
    parser.add_argument("--links", help="links CSV for analyze/score")
    parser.add_argument("--truth", help="ground-truth directory for score")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--include-ambiguous", dest="include_ambiguous", action="store_const", const=True)
    parser.add_argument("--same-edition", dest="same_edition", action="store_const", const=True)
    parser.add_argument("--restrict-father-age", dest="restrict_father_age", type=int)
    parser.add_argument("--set", action="append", metavar="KEY=JSON", help="synth parameter override")
    parser.add_argument("--jobs", type=int, default=None, help="worker threads within a stage")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    run = None
    try:
        config = effective_config(args)
        run = Run(args.command, config, config["jobs"])
        run.out.mkdir(parents=True, exist_ok=True)
        stale = run.out / "error.json"
        if stale.exists():
            stale.unlink()
        run_command(args.command, run)
        manifest = json.dumps(run.manifest(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        (run.out / f"manifest-{args.command}.json").write_text(manifest, encoding="utf-8")
        return 0
    except Exception as exc:  # every failure ends in a machine-readable report
        status = 2 if isinstance(exc, MissingInput) else 1
        report = {
            "command": args.command,
            "stage": run.stage_name if run else None,
            "error": type(exc).__name__,
            "message": str(exc),
            "path": getattr(exc, "path", None),
            "status": status,
        }
        text = json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n"
        sys.stderr.write(text)
        if run is not None:
            try:
                run.out.mkdir(parents=True, exist_ok=True)
                (run.out / "error.json").write_text(text, encoding="utf-8")
            except OSError:
                pass
        if args.verbose:
            log.exception("run failed")
        return status
