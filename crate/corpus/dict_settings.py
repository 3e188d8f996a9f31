import pyast


def apply_settings(settings):
    if 'mode' not in settings:
        return 'default'
    option = settings['mode']
    if option.arg == 'fast':
        return 'turbo'
    return 'normal'
