from pyast import Constant, Name, Store


def render_assignment(target: Name, value: Constant) -> str:
    if isinstance(target.ctx, Store):
        if target.id.startswith('_'):
            return 'private'
        if value.value is None:
            return target.id + ' = None'
        return target.id + ' = ' + str(value.value)
    return 'load'
