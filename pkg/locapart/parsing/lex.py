"""
Table-driven regular expression lexer for scenario files

A lexer class lists its rules per state.
Each state's rules are joined into one alternation,
so the first rule that matches at the cursor wins.

Exceptions:
    Error
        CompileError
        RunError

Interface Classes:
    RegexLexer

Interface Functions:
    action
    skip
"""

import collections
import re

from locapart.parsing.token import EndToken


class Error(Exception):
    """Any failure of the lexer"""


class CompileError(Error):
    """A lexer's rule table is malformed."""


class RunError(Error):
    """
    No rule matches the text at the cursor, or a rule matched nothing.

    The ``lineno``, ``offset`` and ``text`` attributes locate the
    offending character.
    """
    def __init__(self, msg, lineno, offset, text):
        super().__init__(msg, lineno, offset, text)
        self.lineno, self.offset, self.text = lineno, offset, text


_Table = collections.namedtuple("_Table", ["regex", "actions", "targets"])


class RegexLexer:
    """
    Lexer driven by a table of regular expression rules.

    Subclasses define ``RULES``: a mapping of state name to a list of
    ``(pattern, action)`` or ``(pattern, action, next_state)`` rows.
    Patterns must not contain capturing groups and must not match
    the empty string.
    Lexing starts in state ``root``.

    Iterating a lexer yields tokens, ending with an :class:`EndToken`.
    """
    RULES = {"root": []}

    def __init__(self, text):
        self.text = text
        self._tables = {state: self._table(state, rows)
                        for state, rows in self.RULES.items()}
        self._queue = collections.deque()
        self._stream = None
        self._reset()

    def _reset(self):
        self.pos = 0
        self.lineno = 1
        self.offset = 1
        self.state = "root"
        self._queue.clear()

    def __iter__(self):
        self._reset()
        self._stream = self._scan()
        return self

    def __next__(self):
        if self._queue:
            return self._queue.pop()
        return next(self._stream)

    @staticmethod
    def _table(state, rows):
        """Compile one state's rows into a single alternation."""
        patterns, actions, targets = [], [], []
        for i, row in enumerate(rows):
            if len(row) not in (2, 3):
                fstr = "state {!r}, rule {}: expected 2 or 3 fields"
                raise CompileError(fstr.format(state, i))
            patterns.append("(" + row[0] + ")")
            actions.append(row[1])
            targets.append(row[2] if len(row) == 3 else None)
        try:
            regex = re.compile("|".join(patterns))
        except re.error as exc:
            raise CompileError("state {!r}: {}".format(state, exc)) from exc
        if regex.groups != len(patterns):
            raise CompileError("state {!r}: capturing group in a rule".format(state))
        return _Table(regex, actions, targets)

    def _move(self, matched):
        """Move the line and column counters past *matched*."""
        newlines = matched.count("\n")
        if newlines:
            self.lineno += newlines
            self.offset = len(matched) - matched.rfind("\n")
        else:
            self.offset += len(matched)

    def _scan(self):
        while True:
            table = self._tables[self.state]
            match = table.regex.match(self.text, self.pos)
            if match is None:
                break
            rule = match.lastindex - 1
            if match.end() == self.pos:
                fstr = "state {!r}, rule {}: empty match does not advance"
                raise RunError(fstr.format(self.state, rule), self.lineno,
                               self.offset, self.text[self.pos:self.pos + 1])
            table.actions[rule](self, match.group(0))
            while self._queue:
                yield self._queue.pop()
            if table.targets[rule] is not None:
                self.state = table.targets[rule]
            self.pos = match.end()
            self._move(match.group(0))

        if self.pos < len(self.text):
            raise RunError("no rule matches", self.lineno, self.offset,
                           self.text[self.pos])
        yield EndToken("", self.lineno, self.offset)

    def push_token(self, tok):
        """Queue *tok* behind the tokens already pending."""
        self._queue.appendleft(tok)

    def unpop_token(self, tok):
        """Put *tok* back so that it is the next token returned."""
        self._queue.append(tok)

    def peek_token(self):
        """Return the next token without consuming it."""
        tok = next(self)
        self.unpop_token(tok)
        return tok


def action(toktype):
    """Decorate a text converter into a rule action emitting *toktype*."""
    def decorate(convert):
        def emit(lexer, matched):
            tok = toktype(convert(lexer, matched), lexer.lineno, lexer.offset)
            lexer.push_token(tok)
        return emit
    return decorate


def skip(lexer, matched):
    """Rule action that drops the matched text."""
