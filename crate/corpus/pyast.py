# A small syntax-tree model shared by the corpus modules.


class AST:
    def __init__(self):
        self.lineno = 0


class mod(AST):
    pass


class Module(mod):
    def __init__(self, body, type_ignores):
        self.body = body
        self.type_ignores = type_ignores


class Expression(mod):
    def __init__(self, body):
        self.body = body


class stmt(AST):
    pass


class FunctionDef(stmt):
    def __init__(self, name, args, body, decorator_list, returns):
        self.name = name
        self.args = args
        self.body = body
        self.decorator_list = decorator_list
        self.returns = returns


class ClassDef(stmt):
    def __init__(self, name, bases, keywords, body):
        self.name = name
        self.bases = bases
        self.keywords = keywords
        self.body = body


class Return(stmt):
    def __init__(self, value):
        self.value = value


class Delete(stmt):
    def __init__(self, targets):
        self.targets = targets


class Assign(stmt):
    def __init__(self, targets, value):
        self.targets = targets
        self.value = value


class AugAssign(stmt):
    def __init__(self, target, op, value):
        self.target = target
        self.op = op
        self.value = value


class AnnAssign(stmt):
    def __init__(self, target, annotation, value, simple):
        self.target = target
        self.annotation = annotation
        self.value = value
        self.simple = simple


class For(stmt):
    def __init__(self, target, iter, body, orelse):
        self.target = target
        self.iter = iter
        self.body = body
        self.orelse = orelse


class While(stmt):
    def __init__(self, test, body, orelse):
        self.test = test
        self.body = body
        self.orelse = orelse


class If(stmt):
    def __init__(self, test, body, orelse):
        self.test = test
        self.body = body
        self.orelse = orelse


class With(stmt):
    def __init__(self, items, body):
        self.items = items
        self.body = body


class Raise(stmt):
    def __init__(self, exc, cause):
        self.exc = exc
        self.cause = cause


class Try(stmt):
    def __init__(self, body, handlers, orelse, finalbody):
        self.body = body
        self.handlers = handlers
        self.orelse = orelse
        self.finalbody = finalbody


class Assert(stmt):
    def __init__(self, test, msg):
        self.test = test
        self.msg = msg


class Import(stmt):
    def __init__(self, names):
        self.names = names


class ImportFrom(stmt):
    def __init__(self, module, names, level):
        self.module = module
        self.names = names
        self.level = level


class Global(stmt):
    def __init__(self, identifiers):
        self.identifiers = identifiers


class Expr(stmt):
    def __init__(self, value):
        self.value = value


class Pass(stmt):
    pass


class Break(stmt):
    pass


class Continue(stmt):
    pass


class expr(AST):
    pass


class BoolOp(expr):
    def __init__(self, op, values):
        self.op = op
        self.values = values


class BinOp(expr):
    def __init__(self, left, op, right):
        self.left = left
        self.op = op
        self.right = right


class UnaryOp(expr):
    def __init__(self, op, operand):
        self.op = op
        self.operand = operand


class Lambda(expr):
    def __init__(self, args, body):
        self.args = args
        self.body = body


class IfExp(expr):
    def __init__(self, test, body, orelse):
        self.test = test
        self.body = body
        self.orelse = orelse


class Dict(expr):
    def __init__(self, keys, values):
        self.keys = keys
        self.values = values


class Set(expr):
    def __init__(self, elts):
        self.elts = elts


class ListComp(expr):
    def __init__(self, elt, generators):
        self.elt = elt
        self.generators = generators


class Await(expr):
    def __init__(self, value):
        self.value = value


class Yield(expr):
    def __init__(self, value):
        self.value = value


class Compare(expr):
    def __init__(self, left, ops, comparators):
        self.left = left
        self.ops = ops
        self.comparators = comparators


class Call(expr):
    def __init__(self, func, args, keywords):
        self.func = func
        self.args = args
        self.keywords = keywords


class FormattedValue(expr):
    def __init__(self, value, conversion, format_spec):
        self.value = value
        self.conversion = conversion
        self.format_spec = format_spec


class Constant(expr):
    def __init__(self, value, kind):
        self.value = value
        self.kind = kind


class Attribute(expr):
    def __init__(self, value, attr, ctx):
        self.value = value
        self.attr = attr
        self.ctx = ctx


class Subscript(expr):
    def __init__(self, value, slice, ctx):
        self.value = value
        self.slice = slice
        self.ctx = ctx


class Starred(expr):
    def __init__(self, value, ctx):
        self.value = value
        self.ctx = ctx


class Name(expr):
    def __init__(self, id, ctx):
        self.id = id
        self.ctx = ctx


class List(expr):
    def __init__(self, elts, ctx):
        self.elts = elts
        self.ctx = ctx


class Tuple(expr):
    def __init__(self, elts, ctx):
        self.elts = elts
        self.ctx = ctx


class Slice(expr):
    def __init__(self, lower, upper, step):
        self.lower = lower
        self.upper = upper
        self.step = step


class expr_context(AST):
    pass


class Load(expr_context):
    pass


class Store(expr_context):
    pass


class Del(expr_context):
    pass


class operator(AST):
    pass


class Add(operator):
    pass


class Sub(operator):
    pass


class Mult(operator):
    pass


class Div(operator):
    pass


class Mod(operator):
    pass


class boolop(AST):
    pass


class And(boolop):
    pass


class Or(boolop):
    pass


class cmpop(AST):
    pass


class Eq(cmpop):
    pass


class NotEq(cmpop):
    pass


class Lt(cmpop):
    pass


class Gt(cmpop):
    pass


class comprehension(AST):
    def __init__(self, target, iter, ifs, is_async):
        self.target = target
        self.iter = iter
        self.ifs = ifs
        self.is_async = is_async


class ExceptHandler(AST):
    def __init__(self, type, name, body):
        self.type = type
        self.name = name
        self.body = body


class arguments(AST):
    def __init__(self, posonlyargs, args, vararg, defaults):
        self.posonlyargs = posonlyargs
        self.args = args
        self.vararg = vararg
        self.defaults = defaults


class arg(AST):
    def __init__(self, arg, annotation):
        self.arg = arg
        self.annotation = annotation


class keyword(AST):
    def __init__(self, arg, value):
        self.arg = arg
        self.value = value


class alias(AST):
    def __init__(self, name, asname):
        self.name = name
        self.asname = asname


class withitem(AST):
    def __init__(self, context_expr, optional_vars):
        self.context_expr = context_expr
        self.optional_vars = optional_vars


class Interactive(mod):
    def __init__(self, body):
        self.body = body


class FunctionType(mod):
    def __init__(self, argtypes, returns):
        self.argtypes = argtypes
        self.returns = returns


class AsyncFunctionDef(stmt):
    def __init__(self, name, args, body, decorator_list, returns):
        self.name = name
        self.args = args
        self.body = body
        self.decorator_list = decorator_list
        self.returns = returns


class TypeAlias(stmt):
    def __init__(self, name, type_params, value):
        self.name = name
        self.type_params = type_params
        self.value = value


class AsyncFor(stmt):
    def __init__(self, target, iter, body, orelse):
        self.target = target
        self.iter = iter
        self.body = body
        self.orelse = orelse


class AsyncWith(stmt):
    def __init__(self, items, body):
        self.items = items
        self.body = body


class Match(stmt):
    def __init__(self, subject, cases):
        self.subject = subject
        self.cases = cases


class TryStar(stmt):
    def __init__(self, body, handlers, orelse, finalbody):
        self.body = body
        self.handlers = handlers
        self.orelse = orelse
        self.finalbody = finalbody


class Nonlocal(stmt):
    def __init__(self, identifiers):
        self.identifiers = identifiers


class NamedExpr(expr):
    def __init__(self, target, value):
        self.target = target
        self.value = value


class SetComp(expr):
    def __init__(self, elt, generators):
        self.elt = elt
        self.generators = generators


class DictComp(expr):
    def __init__(self, key, value, generators):
        self.key = key
        self.value = value
        self.generators = generators


class GeneratorExp(expr):
    def __init__(self, elt, generators):
        self.elt = elt
        self.generators = generators


class YieldFrom(expr):
    def __init__(self, value):
        self.value = value


class JoinedStr(expr):
    def __init__(self, values):
        self.values = values


class unaryop(AST):
    pass


class Invert(unaryop):
    pass


class Not(unaryop):
    pass


class UAdd(unaryop):
    pass


class USub(unaryop):
    pass


class MatMult(operator):
    pass


class Pow(operator):
    pass


class LShift(operator):
    pass


class RShift(operator):
    pass


class BitOr(operator):
    pass


class BitXor(operator):
    pass


class BitAnd(operator):
    pass


class FloorDiv(operator):
    pass


class LtE(cmpop):
    pass


class GtE(cmpop):
    pass


class Is(cmpop):
    pass


class IsNot(cmpop):
    pass


class In(cmpop):
    pass


class NotIn(cmpop):
    pass


class match_case(AST):
    def __init__(self, pattern, guard, body):
        self.pattern = pattern
        self.guard = guard
        self.body = body


class pattern(AST):
    pass


class MatchValue(pattern):
    def __init__(self, value):
        self.value = value


class MatchSingleton(pattern):
    def __init__(self, value):
        self.value = value


class MatchSequence(pattern):
    def __init__(self, patterns):
        self.patterns = patterns


class MatchMapping(pattern):
    def __init__(self, keys, patterns, rest):
        self.keys = keys
        self.patterns = patterns
        self.rest = rest


class MatchClass(pattern):
    def __init__(self, cls, patterns, kwd_attrs, kwd_patterns):
        self.cls = cls
        self.patterns = patterns
        self.kwd_attrs = kwd_attrs
        self.kwd_patterns = kwd_patterns


class MatchStar(pattern):
    def __init__(self, name):
        self.name = name


class MatchAs(pattern):
    def __init__(self, pattern, name):
        self.pattern = pattern
        self.name = name


class MatchOr(pattern):
    def __init__(self, patterns):
        self.patterns = patterns


class type_ignore(AST):
    pass


class TypeIgnore(type_ignore):
    def __init__(self, lineno, tag):
        self.lineno = lineno
        self.tag = tag


class type_param(AST):
    pass


class TypeVar(type_param):
    def __init__(self, name, bound):
        self.name = name
        self.bound = bound


class ParamSpec(type_param):
    def __init__(self, name):
        self.name = name


class TypeVarTuple(type_param):
    def __init__(self, name):
        self.name = name
