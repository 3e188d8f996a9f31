# Pure functions over builtin values. Each is called once with plain
# arguments and once with every argument wrapped; results must agree.


def add(a, b):
    return a + b


def sign(x):
    if x > 0:
        return 'pos'
    elif x < 0:
        return 'neg'
    return 'zero'


def word_lengths(words):
    out = []
    for w in words:
        out.append(len(w))
    return out


def capitalize_first(s):
    return s[0].upper() + s[1:]


def count_vowels(s):
    n = 0
    for c in s:
        if c == 'a' or c == 'e' or c == 'i' or c == 'o' or c == 'u':
            n += 1
    return n


def merge(a, b):
    out = {}
    for k in a:
        out[k] = a[k]
    for k in b:
        out[k] = b[k]
    return out


def safe_div(a, b):
    if b == 0:
        raise ZeroDivisionError('division by zero')
    return a / b


def clamp(x, lo, hi):
    if x < lo:
        return lo
    if x > hi:
        return hi
    return x


def reverse(xs):
    out = []
    for x in xs:
        out.insert(0, x)
    return out


def total(xs):
    s = 0
    for x in xs:
        s += x
    return s


def largest(xs):
    m = xs[0]
    for x in xs:
        if x > m:
            m = x
    return m


def is_palindrome(s):
    r = ''
    for c in s:
        r = c + r
    return r == s


def get_name(obj):
    return obj.name


def swap(t):
    return (t[1], t[0])


def xor(a, b):
    return (a and not b) or (b and not a)


def nested(d):
    return d['a']['b']


def label(x):
    return 'v=' + str(x)


def len_plus(xs):
    return len(xs) + 1


def abs_diff(a, b):
    return abs(a - b)


def scaled(xs, k):
    out = []
    for x in xs:
        out.append(x * k)
    return out


# A native string method receiving a proxy as its argument rejects it.
def native_in(x):
    return x in 'test'


def cases():
    return [
        ('add', [1, 2]),
        ('add', ['a', 'b']),
        ('add', [1, 'b']),
        ('sign', [5]),
        ('sign', [-2.5]),
        ('sign', [0]),
        ('sign', ['x']),
        ('word_lengths', [['ab', 'c', '']]),
        ('word_lengths', [[1]]),
        ('capitalize_first', ['hello']),
        ('capitalize_first', ['']),
        ('count_vowels', ['education']),
        ('merge', [{'a': 1}, {'b': 2, 'a': 3}]),
        ('merge', [{'a': 1}, 5]),
        ('safe_div', [7, 2]),
        ('safe_div', [7, 0]),
        ('clamp', [5, 0, 3]),
        ('clamp', [-1, 0, 3]),
        ('clamp', [2.5, 0, 3]),
        ('reverse', [[1, 2, 3]]),
        ('reverse', [(4, 5)]),
        ('total', [[1, 2, 3.5]]),
        ('total', [['a']]),
        ('largest', [[3, 9, 2]]),
        ('largest', [[]]),
        ('is_palindrome', ['abba']),
        ('is_palindrome', ['abc']),
        ('get_name', [42]),
        ('swap', [(1, 'x')]),
        ('swap', [[1]]),
        ('xor', [True, False]),
        ('xor', [0, 0]),
        ('nested', [{'a': {'b': 7}}]),
        ('nested', [{'a': 1}]),
        ('label', [3]),
        ('label', [None]),
        ('len_plus', ['abcd']),
        ('len_plus', [7]),
        ('abs_diff', [3, 10]),
        ('scaled', [[1, 2], 3]),
        ('scaled', [['a'], 2]),
    ]


def native_cases():
    return [('native_in', ['abc']), ('native_in', ['es'])]
