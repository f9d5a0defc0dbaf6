"""
The :mod:`locapart.util` module contains top-level utilities for
integer bit strings.
Slater determinants are stored as bit strings over spin-orbitals,
so these helpers carry the occupation and sign bookkeeping.

Interface Functions:

* :func:`bit_on` --- Return the value of a number's bit position
* :func:`clog2` --- Return the ceiling log base two of an integer
* :func:`parity` --- Return the parity of an integer
* :func:`popcount` --- Return the number of set bits
* :func:`iter_bits` --- Iterate through the positions of set bits
* :func:`sign_below` --- Return the fermionic sign of a bit position
"""


def bit_on(num: int, bit: int) -> int:
    """Return the value of a number's bit position.

    For a determinant bit string, this is the occupation of a spin-orbital.
    Since :math:`42 = 2^1 + 2^3 + 2^5`,
    spin-orbitals 1, 3, 5 are occupied:

    >>> [bit_on(42, i) for i in range(6)]
    [0, 1, 0, 1, 0, 1]
    """
    return (num >> bit) & 1


def clog2(num: int) -> int:
    r"""Return the ceiling log base two of an integer :math:`\ge 1`.

    This is the exponent of the smallest power-of-two sample count that
    holds at least N samples:

    >>> [clog2(n) for n in (1, 2, 3, 4096, 4097)]
    [0, 1, 2, 12, 13]

    This function is undefined for non-positive integers:

    >>> clog2(0)
    Traceback (most recent call last):
        ...
    ValueError: expected num >= 1
    """
    if num < 1:
        raise ValueError("expected num >= 1")
    accum, shifter = 0, 1
    while num > shifter:
        shifter <<= 1
        accum += 1
    return accum


def parity(num: int) -> int:
    """Return the parity of a non-negative integer.

    >>> [parity(n) for n in range(10)]
    [0, 1, 1, 0, 1, 0, 0, 1, 1, 0]

    This function is undefined for negative integers:

    >>> parity(-1)
    Traceback (most recent call last):
        ...
    ValueError: expected num >= 0
    """
    if num < 0:
        raise ValueError("expected num >= 0")
    return popcount(num) & 1


def popcount(num: int) -> int:
    """Return the number of set bits of a non-negative integer.

    >>> [popcount(n) for n in (0, 1, 6, 255)]
    [0, 1, 2, 8]
    """
    if num < 0:
        raise ValueError("expected num >= 0")
    return bin(num).count("1")


def iter_bits(num: int):
    """Iterate through the positions of set bits, lowest first.

    >>> list(iter_bits(42))
    [1, 3, 5]
    """
    pos = 0
    while num:
        if num & 1:
            yield pos
        num >>= 1
        pos += 1


def sign_below(num: int, bit: int) -> int:
    """Return :math:`(-1)^k`, where *k* counts the set bits below *bit*.

    This is the phase picked up by a creation or annihilation operator
    acting on spin-orbital *bit* of determinant *num*.

    >>> [sign_below(0b1011, i) for i in range(4)]
    [1, -1, 1, 1]
    """
    return -1 if parity(num & ((1 << bit) - 1)) else 1
