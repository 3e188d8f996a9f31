import pyast


class Shape:
    def __init__(self, name):
        self.name = name


class Circle(Shape):
    def __init__(self, radius):
        self.name = 'circle'
        self.radius = radius


class Rect(Shape):
    def __init__(self, width, height):
        self.name = 'rect'
        self.width = width
        self.height = height


def area(shape):
    if isinstance(shape, Circle):
        if shape.radius > 10:
            return 3 * shape.radius * shape.radius
        return 0
    if isinstance(shape, Rect):
        return shape.width * shape.height
    return None
