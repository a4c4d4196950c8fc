"""
Text formatting utilities for specqa
Creates consistent, aligned console reports
"""

from typing import Any, List, Optional, Sequence, Tuple


class Marker:
    """Prefixes for one-line status messages"""
    SUCCESS = "[ok]"
    ERROR = "[error]"
    WARNING = "[warn]"


def _cell(value: Any, precision: int) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.{precision}f}"
    return str(value)


class ReportFactory:
    """Factory for plain-text console reports"""

    @staticmethod
    def table(
        headers: Sequence[str],
        rows: Sequence[Sequence[Any]],
        title: Optional[str] = None,
        precision: int = 3
    ) -> str:
        """
        Render rows as a left-aligned text table

        Args:
            headers: Column names
            rows: Row values; floats are rendered with `precision` decimals, None as "-"
            title: Optional heading line
            precision: Decimal places for float cells

        Returns:
            The table as a single string without trailing newline
        """
        cells = [[_cell(v, precision) for v in row] for row in rows]
        widths = [len(h) for h in headers]
        for row in cells:
            for i, value in enumerate(row):
                widths[i] = max(widths[i], len(value))

        def line(values: Sequence[str]) -> str:
            return "  ".join(v.ljust(widths[i]) for i, v in enumerate(values)).rstrip()

        out: List[str] = []
        if title:
            out.append(title)
        out.append(line(list(headers)))
        out.append("  ".join("-" * w for w in widths))
        out.extend(line(row) for row in cells)
        return "\n".join(out)

    @staticmethod
    def key_values(pairs: Sequence[Tuple[str, Any]], title: Optional[str] = None, precision: int = 3) -> str:
        """Render (key, value) pairs as an aligned two-column block"""
        width = max((len(k) for k, _ in pairs), default=0)
        out = [title] if title else []
        out.extend(f"{k.ljust(width)} : {_cell(v, precision)}" for k, v in pairs)
        return "\n".join(out)

    @staticmethod
    def success(title: str, description: str = "") -> str:
        return f"{Marker.SUCCESS} {title}" + (f": {description}" if description else "")

    @staticmethod
    def error(title: str, description: str = "") -> str:
        return f"{Marker.ERROR} {title}" + (f": {description}" if description else "")

    @staticmethod
    def warning(title: str, description: str = "") -> str:
        return f"{Marker.WARNING} {title}" + (f": {description}" if description else "")
