import os


def convert_path(pathname):
    if os.sep == '\\':
        return pathname.replace('/', '\\')
    if not pathname:
        return pathname
    if pathname[0] == '/':
        raise ValueError('path is absolute')
    return pathname
