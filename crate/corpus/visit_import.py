import pyast


def visit_import(node):
    if len(node.names) > 0:
        first = node.names[0]
        if first.name == 'os':
            return 'system'
        return first.name
    return None
