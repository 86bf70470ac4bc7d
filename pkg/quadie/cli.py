"""
Command line front end.

Problem data come from one JSON document per run (see
:mod:`quadie.io.config`); flags only control the run. Exit codes:

    0  success
    1  certification failed or a verified property missed its tolerance
    2  input error (malformed config or expression, unreadable file)
    3  the iteration did not converge
"""

import argparse
from dataclasses import dataclass
import logging
import os
import sys

from pandas import DataFrame

from quadie import __version__
from quadie.exceptions import (
    CertificationError,
    ConfigError,
    ConvergenceError,
    ExprDomainError,
    GridMismatchError,
    ParseError,
    UnboundVariableError,
)
from quadie.io import (
    dumps,
    read_problem,
    write_json,
    write_solution_csv,
    write_trace_csv,
)
from quadie.norms import norm_report
from quadie.problem import certify
from quadie.sensitivity import compare_g
from quadie.solver import DEFAULT_MAX_ITER, DEFAULT_TOL, solve
from quadie.verify import refinement_study, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_INPUT = 2
EXIT_DIVERGED = 3

_INPUT_ERRORS = (
    ParseError,
    ConfigError,
    ExprDomainError,
    UnboundVariableError,
    GridMismatchError,
    OSError,
    ValueError,
)


@dataclass
class RunConfig:
    """
    Run control of one command

    Parameters
    ----------
    command : {"check", "solve", "sensitivity", "verify", "norms"}
    input : str, optional
        Problem document; unused by ``verify``.
    output : str, optional
        Directory receiving the result files.
    tol : float, default 1e-10
    max_iter : int, default 10000
    seed : int, default 0
    force : bool, default False
    format : {"human", "machine"}, default "human"
    threads : int, default 1
    """

    command: str
    input: str = None
    output: str = None
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    seed: int = 0
    force: bool = False
    format: str = "human"
    threads: int = 1
    quick: bool = False
    refinement: bool = False
    inject_circular: bool = False

    def __post_init__(self):
        if self.command not in _COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if not self.tol > 0:
            raise ValueError(f"tol must be > 0, not {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, not {self.max_iter}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, not {self.threads}")
        if self.format not in ("human", "machine"):
            raise ValueError(f"format must be human or machine, not {self.format!r}")


class _BaseCommand:
    """
    One sub-command

    Subclasses implement ``_execute``, which returns the machine document,
    the human table and the exit code.
    """

    name = None
    _document = "report.json"

    def __init__(self, cfg, stdout=None):
        self.cfg = cfg
        self.stdout = sys.stdout if stdout is None else stdout

    def load(self):
        """Problem and extra blocks of the input document"""
        if self.cfg.input is None:
            raise ConfigError(f"{self.name} needs a problem document")
        return read_problem(self.cfg.input)

    def run(self):
        doc, table, code = self._execute()
        doc = {"command": self.name, "exit_code": code, **doc}
        if self.cfg.output is not None:
            os.makedirs(self.cfg.output, exist_ok=True)
            write_json(doc, os.path.join(self.cfg.output, self._document))
        self._emit(doc, table)
        return code

    def _execute(self):
        raise NotImplementedError

    def _emit(self, doc, table):
        if self.cfg.format == "machine":
            self.stdout.write(dumps(doc))
            return
        if table is not None:
            self.stdout.write(table.to_string() + "\n")
        for note in doc.get("notes", []):
            self.stdout.write(f"note: {note}\n")
        if "error" in doc:
            self.stdout.write(f"error: {doc['error']}\n")

    def _write(self, writer, obj, name):
        if self.cfg.output is not None:
            writer(obj, self.cfg.output, name)


class CheckCommand(_BaseCommand):
    name = "check"
    _document = "certificate.json"

    def _execute(self):
        p, _ = self.load()
        cert = certify(p, seed=self.cfg.seed)
        code = EXIT_OK if cert.ok else EXIT_FAILED
        doc = {"certificate": cert.to_dict(), "notes": list(cert.notes)}
        return doc, cert.to_frame(), code


class SolveCommand(_BaseCommand):
    name = "solve"
    _document = "summary.json"

    def _execute(self):
        cfg = self.cfg
        p, _ = self.load()
        cert = certify(p, seed=cfg.seed)
        doc = {"certificate": cert.to_dict()}
        try:
            solution = solve(
                p,
                cert,
                tol=cfg.tol,
                max_iter=cfg.max_iter,
                force=cfg.force,
                threads=cfg.threads,
                seed=cfg.seed,
            )
        except CertificationError as err:
            doc.update(error=str(err), notes=list(cert.notes))
            return doc, cert.to_frame(), EXIT_FAILED
        except ConvergenceError as err:
            doc["error"] = str(err)
            if err.solution is not None:
                doc["summary"] = err.solution.summary()
                self._write(write_trace_csv, err.solution.trace, "trace.csv")
                table = err.solution.trace.to_frame().tail(10)
            else:
                table = None
            return doc, table, EXIT_DIVERGED

        self._write(write_solution_csv, solution, "solution.csv")
        self._write(write_trace_csv, solution.trace, "trace.csv")
        summary = solution.summary()
        doc.update(summary=summary, notes=summary["notes"])
        table = DataFrame(
            {"value": {k: v for k, v in summary.items() if k != "notes"}}
        ).rename_axis("quantity")
        return doc, table, EXIT_OK


class SensitivityCommand(_BaseCommand):
    name = "sensitivity"

    def _execute(self):
        cfg = self.cfg
        p, extras = self.load()
        if "g2" not in extras:
            raise ConfigError("sensitivity needs a second nonlinearity 'g2'")
        try:
            report = compare_g(
                p,
                p.nonlinearity,
                extras["g2"],
                tol=cfg.tol,
                max_iter=cfg.max_iter,
                seed=cfg.seed,
                threads=cfg.threads,
            )
        except CertificationError as err:
            doc = {
                "error": str(err),
                "certificate": err.certificate.to_dict(),
                "notes": list(err.certificate.notes),
            }
            return doc, err.certificate.to_frame(), EXIT_FAILED
        except ConvergenceError as err:
            return {"error": str(err)}, None, EXIT_DIVERGED

        self._write(write_trace_csv, report.trace1, "trace1.csv")
        self._write(write_trace_csv, report.trace2, "trace2.csv")
        code = EXIT_OK if report.holds else EXIT_FAILED
        return {"sensitivity": report.to_dict()}, report.to_frame(), code


class VerifyCommand(_BaseCommand):
    name = "verify"

    def load(self):
        return None, {}

    def _execute(self):
        cfg = self.cfg
        report = run_suite(
            seed=cfg.seed, circular=cfg.inject_circular, quick=cfg.quick
        )
        doc = report.to_dict()
        table = report.frame
        if cfg.refinement:
            study = refinement_study()
            doc["refinement"] = {
                "failure_n": study.failure_n,
                "rows": study.frame.to_dict(orient="records"),
            }
            failing = "none" if study.failure_n is None else study.failure_n
            doc["notes"] = [f"largest grid size failing an oracle: {failing}"]
        code = EXIT_OK if report.passed else EXIT_FAILED
        return doc, table, code


class NormsCommand(_BaseCommand):
    name = "norms"

    def _execute(self):
        p, _ = self.load()
        fields = {}
        for m, K in enumerate(p.kernel_samples):
            fields[f"kernels[{m}]"] = K
        for m, V in enumerate(p.multiplier_samples):
            fields[f"multipliers[{m}]"] = V
        for m, u in enumerate(p.u0):
            fields[f"initial[{m}]"] = u
        reports = {name: norm_report(f).to_dict() for name, f in fields.items()}
        table = DataFrame.from_dict(reports, orient="index").rename_axis("field")
        return {"norms": reports}, table, EXIT_OK


_COMMANDS = {
    cls.name: cls
    for cls in (
        CheckCommand,
        SolveCommand,
        SensitivityCommand,
        VerifyCommand,
        NormsCommand,
    )
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", metavar="DIR", help="directory for result files")
    common.add_argument("--tol", type=float, default=DEFAULT_TOL)
    common.add_argument("--max-iter", type=int, default=DEFAULT_MAX_ITER)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument(
        "--force", action="store_true", help="iterate even without a certificate"
    )
    common.add_argument("--format", choices=("human", "machine"), default="human")
    common.add_argument("--threads", type=int, default=1, help="FFT worker threads")
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(
        prog="quadie",
        description="Certify and solve systems of quadratic integral equations",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    helps = {
        "check": "certify the hypotheses of a problem",
        "solve": "certify, then find the fixed point",
        "sensitivity": "compare the solutions of two nonlinearities",
        "norms": "norms of every sampled field",
    }
    for name, text in helps.items():
        cmd = sub.add_parser(name, parents=[common], help=text)
        cmd.add_argument("input", metavar="CONFIG", help="problem document (JSON)")

    verify = sub.add_parser(
        "verify", parents=[common], help="run the inequality property suite"
    )
    verify.add_argument(
        "--quick", action="store_true", help="a tenth of the random trials"
    )
    verify.add_argument(
        "--refinement", action="store_true", help="also coarsen the grid"
    )
    verify.add_argument(
        "--inject-circular", action="store_true", help=argparse.SUPPRESS
    )
    return parser


def _config(args):
    return RunConfig(
        command=args.command,
        input=getattr(args, "input", None),
        output=args.output,
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        force=args.force,
        format=args.format,
        threads=args.threads,
        quick=getattr(args, "quick", False),
        refinement=getattr(args, "refinement", False),
        inject_circular=getattr(args, "inject_circular", False),
    )


def run(cfg, stdout=None):
    """Execute ``cfg`` and return the exit code"""
    command = _COMMANDS[cfg.command](cfg, stdout=stdout)
    try:
        return command.run()
    except CertificationError as err:
        logger.error("%s", err)
        return EXIT_FAILED
    except ConvergenceError as err:
        logger.error("%s", err)
        return EXIT_DIVERGED
    except _INPUT_ERRORS as err:
        logger.error("%s: %s", type(err).__name__, err)
        return EXIT_INPUT


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = _config(args)
    except ValueError as err:
        parser.error(str(err))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
