//! Low-weight irreducible polynomials over GF(2), one per degree 2..=256.
//!
//! Entry `(a, b, c)` for degree `m` denotes `x^m + x^a + 1` when `b = c = 0`,
//! otherwise `x^m + x^a + x^b + x^c + 1`. The lowest-weight polynomial with
//! lexicographically smallest exponents is used for each degree.

pub(super) const IRREDUCIBLE: [(u16, u16, u16); 255] = [
    (1, 0, 0), (1, 0, 0), (1, 0, 0), (2, 0, 0), (1, 0, 0), (1, 0, 0), (4, 3, 1), (1, 0, 0),
    (3, 0, 0), (2, 0, 0), (3, 0, 0), (4, 3, 1), (5, 0, 0), (1, 0, 0), (5, 3, 1), (3, 0, 0),
    (3, 0, 0), (5, 2, 1), (3, 0, 0), (2, 0, 0), (1, 0, 0), (5, 0, 0), (4, 3, 1), (3, 0, 0),
    (4, 3, 1), (5, 2, 1), (1, 0, 0), (2, 0, 0), (1, 0, 0), (3, 0, 0), (7, 3, 2), (10, 0, 0),
    (7, 0, 0), (2, 0, 0), (9, 0, 0), (6, 4, 1), (6, 5, 1), (4, 0, 0), (5, 4, 3), (3, 0, 0),
    (7, 0, 0), (6, 4, 3), (5, 0, 0), (4, 3, 1), (1, 0, 0), (5, 0, 0), (5, 3, 2), (9, 0, 0),
    (4, 3, 2), (6, 3, 1), (3, 0, 0), (6, 2, 1), (9, 0, 0), (7, 0, 0), (7, 4, 2), (4, 0, 0),
    (19, 0, 0), (7, 4, 2), (1, 0, 0), (5, 2, 1), (29, 0, 0), (1, 0, 0), (4, 3, 1), (18, 0, 0),
    (3, 0, 0), (5, 2, 1), (9, 0, 0), (6, 5, 2), (5, 3, 1), (6, 0, 0), (10, 9, 3), (25, 0, 0),
    (35, 0, 0), (6, 3, 1), (21, 0, 0), (6, 5, 2), (6, 5, 3), (9, 0, 0), (9, 4, 2), (4, 0, 0),
    (8, 3, 1), (7, 4, 2), (5, 0, 0), (8, 2, 1), (21, 0, 0), (13, 0, 0), (7, 6, 2), (38, 0, 0),
    (27, 0, 0), (8, 5, 1), (21, 0, 0), (2, 0, 0), (21, 0, 0), (11, 0, 0), (10, 9, 6), (6, 0, 0),
    (11, 0, 0), (6, 3, 1), (15, 0, 0), (7, 6, 1), (29, 0, 0), (9, 0, 0), (4, 3, 1), (4, 0, 0),
    (15, 0, 0), (9, 7, 4), (17, 0, 0), (5, 4, 2), (33, 0, 0), (10, 0, 0), (5, 4, 3), (9, 0, 0),
    (5, 3, 2), (8, 7, 5), (4, 2, 1), (5, 2, 1), (33, 0, 0), (8, 0, 0), (4, 3, 1), (18, 0, 0),
    (6, 2, 1), (2, 0, 0), (19, 0, 0), (7, 6, 5), (21, 0, 0), (1, 0, 0), (7, 2, 1), (5, 0, 0),
    (3, 0, 0), (8, 3, 2), (17, 0, 0), (9, 8, 2), (57, 0, 0), (11, 0, 0), (5, 3, 2), (21, 0, 0),
    (8, 7, 1), (8, 5, 3), (15, 0, 0), (10, 4, 1), (21, 0, 0), (5, 3, 2), (7, 4, 2), (52, 0, 0),
    (71, 0, 0), (14, 0, 0), (27, 0, 0), (10, 9, 7), (53, 0, 0), (3, 0, 0), (6, 3, 2), (1, 0, 0),
    (15, 0, 0), (62, 0, 0), (9, 0, 0), (6, 5, 2), (8, 6, 5), (31, 0, 0), (5, 3, 2), (18, 0, 0),
    (27, 0, 0), (7, 6, 3), (10, 8, 7), (9, 8, 3), (37, 0, 0), (6, 0, 0), (15, 3, 2), (34, 0, 0),
    (11, 0, 0), (6, 5, 2), (1, 0, 0), (8, 5, 2), (13, 0, 0), (6, 0, 0), (11, 3, 2), (8, 0, 0),
    (31, 0, 0), (4, 2, 1), (3, 0, 0), (7, 6, 1), (81, 0, 0), (56, 0, 0), (9, 8, 7), (24, 0, 0),
    (11, 0, 0), (7, 6, 5), (6, 5, 2), (6, 5, 2), (8, 7, 6), (9, 0, 0), (7, 2, 1), (15, 0, 0),
    (87, 0, 0), (8, 3, 2), (3, 0, 0), (9, 4, 2), (9, 0, 0), (34, 0, 0), (5, 3, 2), (14, 0, 0),
    (55, 0, 0), (8, 7, 1), (27, 0, 0), (9, 5, 2), (10, 9, 5), (43, 0, 0), (9, 3, 1), (6, 0, 0),
    (7, 0, 0), (11, 10, 8), (105, 0, 0), (6, 5, 2), (73, 0, 0), (23, 0, 0), (7, 3, 1), (45, 0, 0),
    (11, 0, 0), (8, 4, 1), (7, 0, 0), (8, 6, 2), (5, 4, 2), (33, 0, 0), (9, 8, 3), (32, 0, 0),
    (10, 7, 3), (10, 9, 4), (113, 0, 0), (10, 4, 1), (8, 7, 6), (26, 0, 0), (9, 4, 2), (74, 0, 0),
    (31, 0, 0), (9, 6, 1), (5, 0, 0), (7, 4, 1), (73, 0, 0), (36, 0, 0), (8, 5, 3), (70, 0, 0),
    (95, 0, 0), (8, 5, 1), (111, 0, 0), (6, 4, 1), (11, 2, 1), (82, 0, 0), (15, 14, 10), (35, 0, 0),
    (103, 0, 0), (7, 4, 2), (15, 0, 0), (46, 0, 0), (7, 2, 1), (52, 0, 0), (10, 5, 2),
];
