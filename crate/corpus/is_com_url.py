def is_com_url(url):
    if url.endswith('.com'):
        return True
    return False
