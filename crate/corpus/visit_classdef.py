from pyast import Name


def visit_classdef(node):
    if len(node.bases) == 0:
        node.bases.append(Name('object', None))
        return node
    for base in node.bases:
        if base.id == 'object':
            return node
    return None
