import pyast


def same_target(left, right):
    if left.attr == right.attr:
        if left.value.id == right.value.id:
            return True
        return False
    return None
