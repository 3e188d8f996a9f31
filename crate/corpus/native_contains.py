def is_test_part(s):
    if s in 'test':
        return True
    return False


def count_hits(words, text):
    hits = 0
    for w in words:
        if w in text:
            hits = hits + 1
    if hits > 1:
        return hits
    return 0
