"""Unary and relational assertions, substitution, the sum encoding and bounded entailment."""
from .bounded import (DEFAULT_DOMAIN, Domain, Implication, Table, Witness, count_models,
                      implies_bounded, is_satisfiable, models, valid_bounded)
from .formula import (FALSE, LEFT, PLAIN, RIGHT, TRUE, And, ArityError, Cmp, Const, Ext,
                      Formula, Iff, Implies, Key, Neg, Or, Subst, Truth, agree, arity,
                      bagree, check_arity, conj, disj, encode_plus, equivalent_syntax,
                      ext_from_states, free_keys, holds_pair, holds_r, holds_u, holds_vec,
                      key_of, left, normalize, right, subst, subst_r, subst_u, tag, test)
from .syntax import RELATIONAL, UNARY, format_formula, parse_formula
