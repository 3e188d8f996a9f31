def scale(value, factor):
    if isinstance(value, int):
        if value > 1000:
            return value * factor
        return value
    if isinstance(value, float):
        return value / 2
    return None
