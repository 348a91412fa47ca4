public class Run05 {
    public static void main(String[] args) {
        int v = 16;
        String s = String.valueOf(v);
        String t = s + "!";
        System.out.println(t);
    }
}
