"""
Token types produced by the scenario lexer

Interface Classes:
    Token
        EndToken
        NewlineToken
        NameToken
        LiteralToken
            StringToken
            NumberToken
                IntegerToken
                FloatToken
        PunctuationToken
            LBRACK, RBRACK, EQUALS, COMMA
"""

import collections

Token = collections.namedtuple("Token", ["value", "lineno", "offset"])


class EndToken(Token):
    """Special token for end of buffer"""

class NewlineToken(Token):
    """End of a logical line"""

class NameToken(Token):
    """Bare words, eg schema_version, sto-3g, 1sA_2pzB"""

class LiteralToken(Token):
    """Base class for literal tokens"""

class StringToken(LiteralToken):
    """Quoted strings, eg "runs/fig2" """

class NumberToken(LiteralToken):
    """Base class for numbers"""

class IntegerToken(NumberToken):
    """Integers, eg 4096"""

class FloatToken(NumberToken):
    """Floats, eg 1.4 or 1e-6"""

class PunctuationToken(Token):
    """Base class for punctuation"""

class LBRACK(PunctuationToken):
    """Section opener ["""

class RBRACK(PunctuationToken):
    """Section closer ]"""

class EQUALS(PunctuationToken):
    """Key/value separator ="""

class COMMA(PunctuationToken):
    """Tuple separator ,"""
