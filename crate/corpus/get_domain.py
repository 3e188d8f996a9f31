def get_domain(url):
    if url.startswith('http://'):
        host = url[7:].split('/')[0]
        if len(host) > 0:
            return host
    return None
