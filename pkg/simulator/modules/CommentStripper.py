from __future__ import annotations

from typing import Iterable, List, Optional, Tuple


class CommentStripper:
    """Strip `#` comments from config text, leaving quoted values intact."""

    def __init__(self, line_comment: str = "#") -> None:
        self.line_comment = line_comment

    def strip_line(self, text: str, line_number: Optional[int] = None, source_name: str = "<input>") -> str:
        result: List[str] = []
        quote_char: Optional[str] = None

        for index, ch in enumerate(text):
            if quote_char is not None:
                result.append(ch)
                if ch == quote_char:
                    quote_char = None
                continue
            if text.startswith(self.line_comment, index):
                break
            if ch in {"'", '"'}:
                quote_char = ch
            result.append(ch)

        if quote_char is not None:
            raise ValueError(f"Unterminated quoted value at {source_name}:{line_number or '?'}")
        return "".join(result).strip()

    def strip_lines(self, lines: Iterable[str], source_name: str = "<input>") -> List[Tuple[int, str]]:
        """(line number, content) for every line left non-empty after stripping."""
        kept: List[Tuple[int, str]] = []
        for line_number, line in enumerate(lines, start=1):
            content = self.strip_line(line.rstrip("\r\n"), line_number, source_name)
            if content:
                kept.append((line_number, content))
        return kept
