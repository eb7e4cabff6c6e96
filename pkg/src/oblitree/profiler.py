"""Scoped wall-time profiler with call-count accumulation and call-tree reports.

Enter/exit timestamps are accumulated into plain per-scope counters keyed by
the scope's position in the call tree; no sampling, no symbolization. Each
worker thread accumulates privately (nothing shared on the hot path) and
report() merges the per-thread trees by name, flagging merged output.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field


class ProfilerError(RuntimeError):
    """Raised when a report is requested from an ill-formed profile."""


class _Node:
    __slots__ = ("name", "count", "total_ns", "children")

    def __init__(self, name):
        self.name = name
        self.count = 0
        self.total_ns = 0
        self.children = {}


class _Scope:
    __slots__ = ("_stack", "_node", "_t0")

    def __init__(self, stack, name):
        self._stack = stack
        parent = stack[-1]
        node = parent.children.get(name)
        if node is None:
            node = _Node(name)
            parent.children[name] = node
        self._node = node

    def __enter__(self):
        self._stack.append(self._node)
        self._t0 = time.perf_counter_ns()
        return self

    def __exit__(self, exc_type, exc, tb):
        t1 = time.perf_counter_ns()
        node = self._node
        node.total_ns += t1 - self._t0
        node.count += 1
        self._stack.pop()
        return False


class _NullScope:
    __slots__ = ()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        return False


_NULL_SCOPE = _NullScope()


class Profiler:
    """Accumulates scoped timings; disabled instances cost a no-op context."""

    def __init__(self, enabled: bool = True):
        self.enabled = enabled
        self._local = threading.local()
        self._threads = []  # (root _Node, stack) per contributing thread
        self._registry_lock = threading.Lock()

    def _stack(self):
        stack = getattr(self._local, "stack", None)
        if stack is None:
            root = _Node("")
            stack = [root]
            self._local.stack = stack
            with self._registry_lock:
                self._threads.append((root, stack))
        return stack

    def scope(self, name: str):
        """Context manager timing its body under `name`, nested at record time."""
        if not self.enabled:
            return _NULL_SCOPE
        return _Scope(self._stack(), name)

    def reset(self):
        self._local = threading.local()
        with self._registry_lock:
            self._threads = []

    def report(self, grand_total_ns: int | None = None) -> "ProfileReport":
        """Merge all per-thread scope trees into a ProfileReport.

        grand_total_ns is the wall time of the whole profiled run; when omitted
        it defaults to the summed time of the top-level scopes (empty residual).
        Raises ProfilerError if any scope is still open.
        """
        with self._registry_lock:
            entries = list(self._threads)
        open_scopes = []
        for _, stack in entries:
            open_scopes.extend(node.name for node in stack[1:])
        if open_scopes:
            raise ProfilerError(f"open scopes remain: {' > '.join(open_scopes)}")

        merged_root = _Node("")
        for root, _ in entries:
            _merge_into(merged_root, root)
        stats = tuple(
            sorted(
                (_to_stats(child) for child in merged_root.children.values()),
                key=lambda s: -s.total_ns,
            )
        )
        if grand_total_ns is None:
            grand_total_ns = sum(s.total_ns for s in stats)
        contributing = sum(1 for root, _ in entries if root.children)
        return ProfileReport(
            roots=stats, grand_total_ns=int(grand_total_ns), merged=contributing > 1
        )


DISABLED = Profiler(enabled=False)


def _merge_into(dst: _Node, src: _Node):
    dst.count += src.count
    dst.total_ns += src.total_ns
    for name, child in src.children.items():
        target = dst.children.get(name)
        if target is None:
            target = _Node(name)
            dst.children[name] = target
        _merge_into(target, child)


def _to_stats(node: _Node) -> "ScopeStats":
    children = tuple(
        sorted((_to_stats(c) for c in node.children.values()), key=lambda s: -s.total_ns)
    )
    return ScopeStats(
        name=node.name, call_count=node.count, total_ns=node.total_ns, children=children
    )


@dataclass(frozen=True)
class ScopeStats:
    name: str
    call_count: int
    total_ns: int
    children: tuple = ()


@dataclass(frozen=True)
class ReportRow:
    path: tuple  # scope names from root to this node
    call_count: int | None  # None for the synthesized Other row
    total_ns: int
    pct: float

    @property
    def name(self) -> str:
        return self.path[-1]

    @property
    def depth(self) -> int:
        return len(self.path) - 1


@dataclass(frozen=True)
class ProfileReport:
    """Flattened call-tree report: rows sorted by nesting, then time descending."""

    roots: tuple
    grand_total_ns: int
    merged: bool = False
    rows: tuple = field(init=False)

    def __post_init__(self):
        rows = []

        def walk(stats: ScopeStats, path: tuple):
            path = path + (stats.name,)
            pct = 100.0 * stats.total_ns / self.grand_total_ns if self.grand_total_ns else 0.0
            rows.append(ReportRow(path, stats.call_count, stats.total_ns, pct))
            for child in stats.children:
                walk(child, path)

        for root in self.roots:
            walk(root, ())
        if self.roots or self.grand_total_ns:
            other = self.other_ns
            pct = 100.0 * other / self.grand_total_ns if self.grand_total_ns else 0.0
            rows.append(ReportRow(("Other",), None, other, pct))
        object.__setattr__(self, "rows", tuple(rows))

    @property
    def other_ns(self) -> int:
        """Residual outside the top-level scopes (profiler, auxiliary work)."""
        return self.grand_total_ns - sum(s.total_ns for s in self.roots)

    def render(self, fmt: str = "table") -> str:
        """Render as an aligned text table or TSV."""
        header = ("function", "call_count", "time_s", "pct_total")
        body = []
        for row in self.rows:
            indent = "  " * row.depth if fmt == "table" else ""
            body.append(
                (
                    indent + row.name,
                    "" if row.call_count is None else str(row.call_count),
                    _fmt_s(row.total_ns),
                    f"{row.pct:.2f}%",
                )
            )
        body.append(("Total", "", _fmt_s(self.grand_total_ns), ""))
        title = "profile (merged across workers)" if self.merged else None
        return _render_rows(header, body, fmt, title)


@dataclass(frozen=True)
class ComparisonReport:
    """Two profiles of the same run joined by scope path, with a speedup column."""

    baseline: ProfileReport
    optimized: ProfileReport

    def render(self, fmt: str = "table") -> str:
        header = (
            "function",
            "call_count",
            "baseline_time_s",
            "baseline_pct",
            "optimized_time_s",
            "optimized_pct",
            "speedup",
        )
        opt_by_path = {row.path: row for row in self.optimized.rows}
        body = []
        for row in self.baseline.rows:
            opt = opt_by_path.get(row.path)
            if row.path == ("Other",) or opt is None or opt.total_ns <= 0:
                speedup = "-"
            else:
                speedup = f"{row.total_ns / opt.total_ns:.2f}"
            indent = "  " * row.depth if fmt == "table" else ""
            body.append(
                (
                    indent + row.name,
                    "" if row.call_count is None else str(row.call_count),
                    _fmt_s(row.total_ns),
                    f"{row.pct:.2f}%",
                    _fmt_s(opt.total_ns) if opt else "-",
                    f"{opt.pct:.2f}%" if opt else "-",
                    speedup,
                )
            )
        total_b = self.baseline.grand_total_ns
        total_o = self.optimized.grand_total_ns
        total_speedup = f"{total_b / total_o:.2f}" if total_o > 0 else "-"
        body.append(("Total", "", _fmt_s(total_b), "", _fmt_s(total_o), "", total_speedup))
        return _render_rows(header, body, fmt, None)

    @property
    def total_speedup(self) -> float:
        return self.baseline.grand_total_ns / self.optimized.grand_total_ns


def compare_reports(baseline: ProfileReport, optimized: ProfileReport) -> ComparisonReport:
    return ComparisonReport(baseline=baseline, optimized=optimized)


def _fmt_s(ns: int) -> str:
    return f"{ns / 1e9:.6f}"


def _render_rows(header, body, fmt: str, title) -> str:
    if fmt == "tsv":
        lines = ["\t".join(header)]
        lines += ["\t".join(cells) for cells in body]
        return "\n".join(lines)
    if fmt != "table":
        raise ValueError(f"unknown report format '{fmt}' (expected 'table' or 'tsv')")
    rows = [header] + body
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = []
    if title:
        lines.append(f"# {title}")
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    return "\n".join(lines)
