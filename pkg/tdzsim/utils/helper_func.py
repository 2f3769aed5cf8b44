def format_value(x):
    """ Stable text form of a value for tables and CSV output """
    if isinstance(x, bool):
        return '1' if x else '0'
    if isinstance(x, float):
        return '{:.9g}'.format(x)
    if isinstance(x, complex):
        return '{:.9g}{:+.9g}j'.format(x.real, x.imag)
    return str(x)


def make_table(header, content, column_width=None):
    '''
    Input:
    header -> List[str]: table header
    content -> List[List]: table content, formatted with format_value
    column_width -> int: table column width; set to None for dynamically calculated widths

    Output:
    table_str -> str: well-formatted string for the table
    '''
    rows = [[format_value(x) for x in row] for row in content]
    if column_width is None:
        lens = [[len(str(h)) for h in header]] + [[len(x) for x in row] for row in rows]
        column_widths = [max(c) + 3 for c in zip(*lens)]
    else:
        column_widths = [column_width] * len(header)
    rule = sum(column_widths) + 1

    def line(cells):
        return '|' + ''.join(' ' + str(cell).ljust(width - 2) + '|' for cell, width in zip(cells, column_widths)) + '\n'

    table_str = '=' * rule + '\n' + line(header) + '-' * rule + '\n'
    table_str += ''.join(line(row) for row in rows)
    table_str += '=' * rule + '\n'
    return table_str
