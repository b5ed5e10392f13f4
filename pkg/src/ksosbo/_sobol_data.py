"""Primitive polynomials and initial direction numbers for the Sobol generator.

Entries follow the classic direction-number table format: for dimension j >= 2,
(s, a, m) gives the degree s of the primitive polynomial over GF(2), the
integer a encoding its inner coefficients a_1..a_{s-1} (a_1 most significant),
and the first s odd initial values m_1..m_s. Dimension 1 uses m_k = 1 for all
k. Covers dimensions up to 16.
"""

# dim -> (s, a, (m_1, ..., m_s))
DIRECTION_TABLE = {
    2: (1, 0, (1,)),
    3: (2, 1, (1, 3)),
    4: (3, 1, (1, 3, 1)),
    5: (3, 2, (1, 1, 1)),
    6: (4, 1, (1, 1, 3, 3)),
    7: (4, 4, (1, 3, 5, 13)),
    8: (5, 2, (1, 1, 5, 5, 17)),
    9: (5, 4, (1, 1, 5, 5, 5)),
    10: (5, 7, (1, 1, 7, 11, 19)),
    11: (5, 11, (1, 1, 5, 1, 1)),
    12: (5, 13, (1, 1, 1, 3, 11)),
    13: (5, 14, (1, 3, 5, 5, 31)),
    14: (6, 1, (1, 3, 3, 9, 7, 49)),
    15: (6, 13, (1, 1, 1, 15, 21, 21)),
    16: (6, 16, (1, 3, 1, 13, 27, 49)),
}

MAX_DIM = 16
