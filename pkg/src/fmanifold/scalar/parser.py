'''Expression parser for coordinate functions.

Grammar (recursive descent, one token of lookahead):

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' uint)?
    base   := 'u' uint | rational | '(' expr ')' | '-' base

Rational literals are exact: '3', '2/5' (via the division rule), '1.25'.
A leading minus is accepted anywhere a base is legal so that printed
polynomials round-trip.  Trees are plain tuples; lower() folds constants
and maps the tree onto a chosen backend, where division is only allowed
if that backend supports the quotient.
'''

import re
from fractions import Fraction

from ..errors import ExprSyntaxError, UnknownVariable
from .jet import Jet
from .poly import Poly
from .rational import RationalFn

_TOKEN = re.compile(r'\s*(?:(?P<var>u\d+)|(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<op>[-+*/^()]))')


def tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ExprSyntaxError(f'unexpected character {text[pos:].strip()[0]!r}', pos)
            break
        if m.lastgroup == 'var':
            tokens.append(('var', int(m.group('var')[1:]), m.start('var')))
        elif m.lastgroup == 'num':
            tokens.append(('num', Fraction(m.group('num')), m.start('num')))
        else:
            tokens.append(('op', m.group('op'), m.start('op')))
        pos = m.end()
    tokens.append(('end', None, len(text)))
    return tokens


class _Parser:

    def __init__(self, tokens):
        self.tokens = tokens
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op):
        kind, val, pos = self.take()
        if kind != 'op' or val != op:
            raise ExprSyntaxError(f'expected {op!r}', pos)

    def expr(self):
        node = self.term()
        while self.peek()[:2] in (('op', '+'), ('op', '-')):
            _, op, _ = self.take()
            rhs = self.term()
            node = ('add' if op == '+' else 'sub', node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek()[:2] in (('op', '*'), ('op', '/')):
            _, op, _ = self.take()
            rhs = self.factor()
            node = ('mul' if op == '*' else 'div', node, rhs)
        return node

    def factor(self):
        node = self.base()
        if self.peek()[:2] == ('op', '^'):
            self.take()
            kind, val, pos = self.take()
            if kind != 'num' or val.denominator != 1 or val < 0:
                raise ExprSyntaxError('exponent must be a non-negative integer', pos)
            node = ('pow', node, int(val))
        return node

    def base(self):
        kind, val, pos = self.take()
        if kind == 'var':
            return ('var', val)
        if kind == 'num':
            return ('num', val)
        if kind == 'op' and val == '(':
            node = self.expr()
            self.expect_op(')')
            return node
        if kind == 'op' and val == '-':
            return ('neg', self.base_or_factor())
        raise ExprSyntaxError('expected a variable, number or parenthesis', pos)

    def base_or_factor(self):
        # bind unary minus tighter than * but allow -u1^2
        node = self.base()
        if self.peek()[:2] == ('op', '^'):
            self.take()
            kind, val, pos = self.take()
            if kind != 'num' or val.denominator != 1 or val < 0:
                raise ExprSyntaxError('exponent must be a non-negative integer', pos)
            node = ('pow', node, int(val))
        return node


def parse(text):
    '''Parse an expression string into a tuple tree.'''
    parser = _Parser(tokenize(text))
    node = parser.expr()
    kind, _, pos = parser.peek()
    if kind != 'end':
        raise ExprSyntaxError('trailing input after expression', pos)
    return node


def tree_vars(tree):
    '''All variable indices referenced by the tree.'''
    kind = tree[0]
    if kind == 'var':
        return {tree[1]}
    if kind == 'num':
        return set()
    if kind in ('neg',):
        return tree_vars(tree[1])
    if kind == 'pow':
        return tree_vars(tree[1])
    return tree_vars(tree[1]) | tree_vars(tree[2])


def lower(tree, backend, n, point=None, order=3):
    '''Map a parse tree onto a scalar backend.

    backend is one of 'poly', 'rational', 'jet'; jets additionally need
    the base point (and optionally the truncation order).
    '''
    for v in tree_vars(tree):
        if not 1 <= v <= n:
            raise UnknownVariable(f'variable u{v} undefined with n={n}')

    if backend == 'poly':
        const = lambda c: Poly.const(n, c)
        var = lambda i: Poly.var(i, n)
    elif backend == 'rational':
        const = lambda c: RationalFn.const(n, c)
        var = lambda i: RationalFn.var(i, n)
    elif backend == 'jet':
        if point is None:
            raise ValueError('jet backend needs a base point')
        const = lambda c: Jet.constant(n, point, order, c)
        var = lambda i: Jet.coordinate(i, n, point, order)
    else:
        raise ValueError(f'unknown backend {backend!r}')

    def walk(node):
        kind = node[0]
        if kind == 'num':
            return const(node[1])
        if kind == 'var':
            return var(node[1])
        if kind == 'neg':
            return -walk(node[1])
        if kind == 'pow':
            return walk(node[1]) ** node[2]
        a = walk(node[1])
        b = walk(node[2])
        if kind == 'add':
            return a + b
        if kind == 'sub':
            return a - b
        if kind == 'mul':
            return a * b
        return a / b

    return walk(tree)


def parse_scalar(text, backend, n, point=None, order=3):
    return lower(parse(text), backend, n, point=point, order=order)
