package corpus;

import java.util.ArrayList;
import java.util.HashMap;
import java.util.Iterator;
import java.util.List;
import java.util.Map;

/** Collection code written the way erasure compiles it: raw containers and casts on the way out. */
public class Generic {
    public static int totalLength(List words) {
        int n = 0;
        for (Iterator it = words.iterator(); it.hasNext();) {
            String w = (String) it.next();
            n += w.length();
        }
        return n;
    }

    public static Map index(List words) {
        Map m = new HashMap();
        for (int i = 0; i < words.size(); i++) {
            m.put(words.get(i), new Integer(i));
        }
        return m;
    }

    public static String first(List l) {
        if (l == null || l.isEmpty()) {
            return null;
        }
        return (String) l.get(0);
    }

    static class Box {
        private Object value;

        Box(Object value) {
            this.value = value;
        }

        Object get() {
            return value;
        }

        String asString() {
            return (String) get();
        }
    }

    static class Pair {
        final Object left;
        final Object right;

        Pair(Object l, Object r) {
            left = l;
            right = r;
        }

        Pair swap() {
            return new Pair(right, left);
        }
    }

    static class Stack {
        private final List items = new ArrayList();

        void push(Object o) {
            items.add(o);
        }

        Object pop() {
            return items.remove(items.size() - 1);
        }

        boolean isEmpty() {
            return items.isEmpty();
        }
    }
}
