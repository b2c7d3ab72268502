"""
レポート生成専用モジュール
計算結果を JSON（既定）または整形済みの表として出力
"""

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from . import __version__
from .validation import ValidationReport


@dataclass
class Agreement:
    """二つの計算経路の照合（両側の次元を必ず保持する）"""
    name: str
    query: Dict[str, Any]
    left_route: str
    left_dim: int
    right_route: str
    right_dim: int
    asserted: bool = True
    note: Optional[str] = None

    @property
    def equal(self) -> bool:
        return self.left_dim == self.right_dim

    @property
    def failed(self) -> bool:
        return self.asserted and not self.equal

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "query": self.query,
            "left": {"route": self.left_route, "dim": self.left_dim},
            "right": {"route": self.right_route, "dim": self.right_dim},
            "equal": self.equal,
            "asserted": self.asserted,
        }
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class InvariantReport:
    """compute / suite の結果"""
    command: str
    query: Dict[str, Any]
    dims: Dict[str, int] = field(default_factory=dict)
    certificates: Dict[str, Any] = field(default_factory=dict)
    agreements: List[Agreement] = field(default_factory=list)
    results: List[Dict[str, Any]] = field(default_factory=list)
    extra: Dict[str, Any] = field(default_factory=dict)
    errors: List[str] = field(default_factory=list)
    verdict: Optional[str] = None
    timing: Optional[float] = None

    def add_agreement(self, agreement: Agreement):
        self.agreements.append(agreement)

    @property
    def failed_agreements(self) -> List[Agreement]:
        return [a for a in self.agreements if a.failed]

    @property
    def ok(self) -> bool:
        return not self.errors and not self.failed_agreements

    def to_dict(self, include_timing: bool = True) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "version": __version__,
            "command": self.command,
            "query": self.query,
            "dims": self.dims,
            "certificates": self.certificates,
            "agreement": {
                "all_equal": not self.failed_agreements,
                "checks": [a.to_dict() for a in self.agreements],
            },
            "ok": self.ok,
        }
        if self.results:
            data["results"] = self.results
        if self.extra:
            data.update(self.extra)
        if self.errors:
            data["errors"] = self.errors
        if self.verdict is not None:
            data["verdict"] = self.verdict
        if include_timing and self.timing is not None:
            data["timing"] = {"seconds": round(self.timing, 6)}
        return data


class ReportGenerator:
    """レポート出力専用クラス"""

    def __init__(self, pretty: bool = False, include_timing: bool = True):
        self.pretty = pretty
        self.include_timing = include_timing

    def render(self, report: InvariantReport) -> str:
        if self.pretty:
            return self._render_table(report)
        return self._dump(report.to_dict(self.include_timing))

    def render_validation(self, report: ValidationReport, path: str) -> str:
        if not self.pretty:
            data = report.to_dict()
            data["file"] = path
            data["version"] = __version__
            return self._dump(data)

        lines = [f"📋 検証結果: {path}"]
        summary = report.summary
        if summary["critical"] > 0:
            lines.append(f"🚨 重大エラー: {summary['critical']}個")
        if summary["warning"] > 0:
            lines.append(f"⚠️ 警告: {summary['warning']}個")
        if summary["info"] > 0:
            lines.append(f"ℹ️ 情報: {summary['info']}個")
        for result in report.results:
            where = f"[{result.location}] " if result.location else ""
            lines.append(f"  - {result.level.value}: {where}{result.message}")
            if result.suggestion:
                lines.append(f"    💡 {result.suggestion}")
        if not report.has_errors():
            lines.append("✅ レジストリは有効です")
        return "\n".join(lines)

    def _dump(self, data: Dict[str, Any]) -> str:
        return json.dumps(data, sort_keys=True, ensure_ascii=False, indent=2)

    def _render_table(self, report: InvariantReport) -> str:
        lines = [f"homquot {__version__}: {report.command}"]
        lines.append("  " + ", ".join(f"{k}={v}" for k, v in sorted(report.query.items())))
        if report.dims:
            lines.append("")
            lines.extend(self._table(["route", "dim"], [[k, v] for k, v in sorted(report.dims.items())]))
        if report.agreements:
            lines.append("")
            rows = []
            for a in report.agreements:
                mark = "=" if a.equal else "≠"
                query = " ".join(str(v) for _, v in sorted(a.query.items()))
                rows.append([
                    a.name, query, f"{a.left_route}:{a.left_dim}", mark,
                    f"{a.right_route}:{a.right_dim}", "yes" if a.asserted else "no"
                ])
            lines.extend(self._table(["check", "query", "left", "", "right", "asserted"], rows))
        if report.results:
            lines.append("")
            keys = sorted({k for row in report.results for k in row})
            rows = [[row.get(k, "") for k in keys] for row in report.results]
            lines.extend(self._table(keys, rows))
        if report.certificates:
            lines.append("")
            lines.append("certificates: " + json.dumps(report.certificates, sort_keys=True, ensure_ascii=False))
        for key, value in sorted(report.extra.items()):
            lines.append(f"{key}: " + json.dumps(value, sort_keys=True, ensure_ascii=False))
        for error in report.errors:
            lines.append(f"🚨 {error}")
        if report.verdict is not None:
            lines.append(f"verdict: {report.verdict}")
        lines.append("✅ すべて一致" if report.ok else "❌ 不一致または計算失敗があります")
        if self.include_timing and report.timing is not None:
            lines.append(f"timing: {report.timing:.3f}s")
        return "\n".join(lines)

    def _table(self, headers: List[str], rows: List[List[Any]]) -> List[str]:
        cells = [[str(c) for c in headers]] + [[self._cell(c) for c in row] for row in rows]
        widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
        out = []
        for n, row in enumerate(cells):
            out.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
            if n == 0:
                out.append("  ".join("-" * w for w in widths).rstrip())
        return out

    def _cell(self, value: Any) -> str:
        if isinstance(value, (list, dict)):
            return json.dumps(value, sort_keys=True, ensure_ascii=False)
        return str(value)
